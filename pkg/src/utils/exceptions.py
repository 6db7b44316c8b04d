class MinklabError(Exception):
    pass

class PrecisionLossError(MinklabError):
    def __init__(self, message="Series cancellation exceeds working precision", required_bits=None):
        self.required_bits = required_bits
        super().__init__(message)

class SingularMatrixError(MinklabError):
    pass

class ConvergenceError(MinklabError):
    def __init__(self, message="Iteration did not converge", iterations=None):
        self.iterations = iterations
        super().__init__(message)

class TailBoundError(ConvergenceError):
    pass

class DomainError(MinklabError):
    pass

class BranchCutError(DomainError):
    pass

class PoleError(DomainError):
    def __init__(self, message="Argument too close to a pole", pole=None):
        self.pole = pole
        super().__init__(message)

class InadmissiblePairError(DomainError):
    pass

class SizeLimitError(MinklabError):
    def __init__(self, message="Requested size exceeds guard", limit=None):
        self.limit = limit
        super().__init__(message)

class ValidationError(MinklabError):
    pass

class ConfigError(ValidationError):
    pass

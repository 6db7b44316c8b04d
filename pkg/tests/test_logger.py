import logging

from src.utils import logger as logger_module
from src.utils.logger import PACKAGE_LOGGER, get_logger, setup_logging


def test_loggers_live_under_the_package_name() -> None:
    first = get_logger("padic.chain")
    assert first.name == "minklab.padic.chain"
    assert get_logger("padic.chain") is first
    assert logging.getLogger(PACKAGE_LOGGER).handlers


def test_setup_logging_writes_files_and_quiets_sympy(tmp_path, monkeypatch, caplog) -> None:
    monkeypatch.setattr(logger_module, "LOG_FILE_PATH", tmp_path / "logs" / "run.log")
    package = setup_logging("warning")
    try:
        handlers = package.handlers
        assert len(handlers) == 3
        console = [h for h in handlers if type(h) is logging.StreamHandler]
        assert console and console[0].level == logging.WARNING
        assert logging.getLogger("sympy").level == logging.WARNING

        with caplog.at_level(logging.INFO, logger=PACKAGE_LOGGER):
            get_logger("verify").error("stage exploded")
        assert "stage exploded" in caplog.text
        for handler in handlers:
            handler.flush()
        assert "stage exploded" in (tmp_path / "logs" / "errors.log").read_text()
        assert "minklab.verify" in (tmp_path / "logs" / "run.log").read_text()
    finally:
        monkeypatch.undo()
        setup_logging()

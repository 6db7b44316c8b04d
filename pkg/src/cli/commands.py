"""Subcommand handlers. Each fills the report it is given from the resolved run configuration."""
from fractions import Fraction

from mpmath import mp

from src.cli.config import RunConfig
from src.cli.report import Report
from src.moments.generating import asymptotic_constant
from src.moments.solver import export_table, solve_moments
from src.numerics.precision import parse_complex, working_precision
from src.padic.chain import characteristic_polynomial, is_primitive, markov_matrix, orbit
from src.padic.distribution import (compare_mu, even_odd_counts, even_odd_enumerated, mu_closed_form,
                                    mu_from_chain)
from src.padic.zeta import Z_p, Z_p_shell_sum
from src.period.dyadic import G_eval, check_three_term
from src.qmark.minkowski import F_eval, fixed_points, qmark_eval, qmark_exact, qmark_inverse, salem_exponent
from src.qmark.models import LazyReal, parse_real
from src.spectral.operator import eigenvalues
from src.tree.calkin_wilf import generation, newman_sequence, stern
from src.tree.distribution import deviation_sweep, empirical_cdf
from src.utils.exceptions import ValidationError


def _digits(config: RunConfig) -> int:
    return min(40, int(config.prec * 0.30103))


def _text(value, config: RunConfig) -> str:
    return mp.nstr(value, _digits(config))


def _require(config: RunConfig, name: str):
    value = config.params.get(name)
    if value is None:
        raise ValidationError(f"--{name.replace('_', '-')} is required for this command")
    return value


def run_qmark(config: RunConfig, report: Report):
    action = config.params["action"]
    prec = config.prec
    if action == "eval":
        x = parse_real(_require(config, "x"))
        row = {"x": str(x), "value": _text(qmark_eval(x, prec), config)}
        if not isinstance(x, LazyReal):
            row["exact"] = str(qmark_exact(x))
        report.add(row)
    elif action == "inverse":
        y = parse_real(_require(config, "y"))
        preimage = qmark_inverse(y, prec)
        value = str(preimage) if isinstance(preimage, Fraction) else _text(preimage, config)
        report.add({"y": str(y), "inverse": value})
    elif action == "fixed":
        for point in fixed_points(prec):
            report.add({"fixed_point": _text(point, config)})
    elif action == "salem":
        report.add({"holder_exponent": _text(salem_exponent(prec), config)})


def run_tree(config: RunConfig, report: Report):
    action = config.params["action"]
    if action == "gen":
        members = generation(config.gen)
        for index, x in enumerate(members):
            report.add({"index": index, "numerator": x.numerator, "denominator": x.denominator})
        report.summary["size"] = len(members)
    elif action == "stern":
        count = int(config.params.get("count") or 16)
        report.add({"stern": [stern(n) for n in range(count)]})
    elif action == "newman":
        count = int(config.params.get("count") or 16)
        report.add({"newman": [str(x) for x in newman_sequence(count)]})
    elif action == "cdf":
        x = Fraction(_require(config, "x"))
        empirical = empirical_cdf(config.gen, x)
        report.add({"x": str(x), "n": config.gen, "F_n": str(empirical),
                    "F": _text(F_eval(x, config.prec), config)})
    elif action == "deviation":
        points = int(config.params.get("points") or 10 ** 4)
        sweep = deviation_sweep(config.gen, points)
        worst = max(abs(d.delta) for d in sweep)
        report.summary.update({"n": config.gen, "points": points, "sup": float(worst),
                               "bound": 2.0 ** -config.gen, "within_bound": worst <= Fraction(1, 2 ** config.gen)})


def run_moments(config: RunConfig, report: Report):
    kernel = config.params.get("kernel") or "mobius"
    table = solve_moments(config.order, config.prec, kernel)
    report.export = lambda format: export_table(table, format)
    with working_precision(table.work_prec):
        for L in range(1, table.order + 1):
            report.add({"L": L, "m": _text(table.m[L], config), "M": _text(table.M[L], config),
                        "B": table.B[L], "err": mp.nstr(table.err[L], 5)})
        kappa = asymptotic_constant(table).kappa
    report.summary.update({"kernel": kernel, "reliable_order": table.reliable_order(),
                           "truncation_error": mp.nstr(table.truncation_error, 5),
                           "kappa": _text(kappa.value, config)})


def run_gfun(config: RunConfig, report: Report):
    action = config.params["action"]
    table = solve_moments(config.order, config.prec)
    with working_precision(table.work_prec):
        z = parse_complex(_require(config, "z"))
    if action == "eval":
        result = G_eval(z, table, config.params.get("method") or "auto")
        report.add(result.to_dict())
    elif action == "check":
        residuals = check_three_term(z, table)
        report.add({"z": mp.nstr(z, 15), **{k: mp.nstr(v, 5) for k, v in residuals.items()}})


def run_eigen(config: RunConfig, report: Report):
    count = int(config.params.get("count") or 4)
    basis = config.params.get("basis") or "mobius"
    pairs = eigenvalues(config.order, config.prec, count, basis)
    for pair in pairs:
        report.add(pair.to_dict(with_coeffs=bool(config.params.get("coeffs"))))
    report.summary["order"] = config.order


def run_padic(config: RunConfig, report: Report):
    action = config.params["action"]
    p = int(_require(config, "p")) if action != "counts" else None
    if action == "mu":
        z = Fraction(config.params.get("z") or 0)
        nu = int(_require(config, "nu"))
        row = {"p": p, "z": str(z), "nu": nu, "closed_form": str(mu_closed_form(p, z, nu)),
               "chain": str(mu_from_chain(p, z, nu))}
        if config.params.get("empirical"):
            comparison = compare_mu(p, z, nu, [int(config.params["empirical"])])
            row["empirical"] = str(comparison.empirical[int(config.params["empirical"])])
        report.add(row)
    elif action == "orbit":
        chain = orbit(p, int(config.params.get("kappa") or 1))
        for state_id, state in enumerate(chain.states):
            report.add({"state_id": state_id, **state.to_dict()})
        report.summary.update({"size": len(chain), "primitive_power": is_primitive(chain)})
    elif action == "matrix":
        chain = markov_matrix(p, int(config.params.get("kappa") or 1))
        for row, entries in enumerate(chain.matrix()):
            for col, value in enumerate(entries):
                if value:
                    report.add({"row": row, "col": col, "num": value.numerator, "den": value.denominator})
        report.summary["charpoly"] = str(characteristic_polynomial(chain))
    elif action == "zeta":
        s = parse_complex(_require(config, "s"))
        report.add({"p": p, "s": mp.nstr(s, 15), "closed_form": mp.nstr(Z_p(p, s), 15),
                    "shell_sum": mp.nstr(Z_p_shell_sum(p, s), 15)})
    elif action == "counts":
        n = config.gen
        even, odd = even_odd_counts(n)
        row = {"n": n, "E": even, "O": odd}
        if n <= 20:
            row["E_enumerated"], row["O_enumerated"] = even_odd_enumerated(n)
        report.add(row)


HANDLERS = {
    "qmark": run_qmark,
    "tree": run_tree,
    "moments": run_moments,
    "gfun": run_gfun,
    "eigen": run_eigen,
    "padic": run_padic,
}

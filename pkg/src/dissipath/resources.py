"""Cost formulas and bundled resource fixtures.

Scaling formulas return constant-free comparators ("scaling units"), not
gate counts. Absolute Toffoli totals come only from :func:`total_cost`
with a user-supplied cost per block-encoding call.
"""
import json
import math
from dataclasses import dataclass
from importlib import resources as _res

from .errors import DivergenceError, DomainError

HARTREE_PER_KCAL_MOL = 1.6e-3  # 1 kcal/mol ~ 1.6 mHa
KT_KCAL_MOL_298 = 0.6

_LOGS = {"ln": math.log, "log2": math.log2, "log10": math.log10}


@dataclass(frozen=True)
class ComplexityInputs:
    h_norm: float
    delta_min: float
    eps_e: float
    n_o: float
    p0: float = 1.0
    p_succ: float = 0.5
    c_dk: float = None
    d_eff: float = None

    def __post_init__(self):
        for name in ("h_norm", "delta_min", "eps_e", "n_o"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        for name in ("p0", "p_succ"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise DomainError(f"{name} must lie in (0, 1]")


@dataclass(frozen=True)
class CostModel:
    n_omega: int = 1000
    qsvt_eps: float = 1e-3
    cost_uh: int = 10_000
    t_per_rz: int = 50
    n_h: int = 32
    n_t: int = 50
    rz_per_kick: int = 3


@dataclass(frozen=True)
class SystemFixture:
    name: str
    qubits: int
    toffoli_w: float
    toffoli_qpe: float

    @property
    def ratio(self):
        return self.toffoli_w / self.toffoli_qpe


DEFAULT_POLY_EXPONENT = {"QPE": 1.0, "DAS": 1.0, "PR": 1.0, "DC": 1.0, "DISS": 3.0}


def gate_complexity(method, inp, poly_exponent=None):
    """Constant-free gate-complexity comparator for one algorithm family.

    QPE  (|H|/D)(1/eps)(1/p0) poly
    DAS  (|H|^3/D^5)(1/eps) poly
    PR   (|H|/D^3)(1/eps)(1/(1-p_succ)) poly
    DC   (|H|/D^3)(1/eps) poly
    DISS (|H|/D^3)(1/eps) N_o^3
    """
    method = method.upper()
    if method not in DEFAULT_POLY_EXPONENT:
        raise DomainError(f"unknown method {method!r}")
    e = DEFAULT_POLY_EXPONENT[method] if poly_exponent is None else poly_exponent
    h, d, eps = inp.h_norm, inp.delta_min, inp.eps_e
    poly = inp.n_o**e
    if method == "QPE":
        return h / d / eps / inp.p0 * poly
    if method == "DAS":
        return h**3 / d**5 / eps * poly
    if method == "PR":
        if inp.p_succ >= 1:
            raise DivergenceError("PR repetition overhead 1/(1 - p_succ) diverges at p_succ = 1")
        return h / d**3 / eps / (1.0 - inp.p_succ) * poly
    return h / d**3 / eps * poly


def n_uh_calls(n_omega, h_norm, qsvt_eps, log="ln"):
    """ceil(2 N_omega (pi |H| / 2 + log(1/eps)))."""
    if n_omega <= 0 or h_norm <= 0 or not 0 < qsvt_eps <= 1:
        raise DomainError("need n_omega > 0, h_norm > 0 and 0 < eps <= 1")
    return math.ceil(2 * n_omega * (math.pi * h_norm / 2 + _LOGS[log](1.0 / qsvt_eps)))


def total_cost(model, n_uh):
    """N_H * N_T * N_UH * Cost(U_H). Integer inputs multiply exactly."""
    return model.n_h * model.n_t * n_uh * model.cost_uh


def kick_t_cost(n_omega, t_per_rz=50, rz_per_kick=3):
    """T gates for the (2 N_omega + 1) ancilla kicks."""
    return (2 * n_omega + 1) * rz_per_kick * t_per_rz


def _load_table2():
    text = _res.files("dissipath").joinpath("data/table2.json").read_text()
    return json.loads(text)


def table2_fixtures():
    return [SystemFixture(name, int(q), float(w), float(qpe)) for name, q, w, qpe in _load_table2()["rows"]]


def fixture_ratios():
    """W/QPE Toffoli ratio per bundled system."""
    return {f.name: f.ratio for f in table2_fixtures()}


def rate_ratio(barrier_error_kcal, temperature=298.0):
    """Rate multiplier exp(dE / kT), with kT = 0.6 kcal/mol at 298 K scaled linearly in T."""
    if temperature <= 0:
        raise DomainError("temperature must be positive")
    kt = KT_KCAL_MOL_298 * temperature / 298.0
    return math.exp(barrier_error_kcal / kt)


def hartree_to_kcal(e_ha):
    return e_ha / HARTREE_PER_KCAL_MOL


def resource_report(model=None, inputs=None):
    model = model or CostModel()
    n_uh = n_uh_calls(model.n_omega, 1.0 if inputs is None else inputs.h_norm, model.qsvt_eps)
    doc = {
        "units_note": "gate_complexity values are constant-free scaling units, not gate counts",
        "n_uh_calls": n_uh,
        "total_toffoli": total_cost(model, n_uh),
        "kick_t_count": kick_t_cost(model.n_omega, model.t_per_rz, model.rz_per_kick),
        "table2": [
            {"name": f.name, "qubits": f.qubits, "toffoli_w": f.toffoli_w, "toffoli_qpe": f.toffoli_qpe,
             "w_over_qpe": f.ratio}
            for f in table2_fixtures()
        ],
        "max_w_over_qpe": max(fixture_ratios().values()),
    }
    if inputs is not None:
        doc["gate_complexity"] = {m: gate_complexity(m, inputs) for m in DEFAULT_POLY_EXPONENT}
    return doc


def report_table(doc):
    """Aligned-text rendering of the fixture rows."""
    rows = [f"{'system':26s} {'qubits':>7s} {'Toffoli W':>11s} {'Toffoli QPE':>12s} {'ratio':>7s}"]
    for r in doc["table2"]:
        rows.append(f"{r['name']:26s} {r['qubits']:7d} {r['toffoli_w']:11.3g} {r['toffoli_qpe']:12.3g} "
                    f"{r['w_over_qpe']:7.2f}")
    return "\n".join(rows)

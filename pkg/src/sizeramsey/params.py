"""Named constants, the six derived probabilities, and the key=value parameter file."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields

from .errors import ConfigError, ParameterInfeasible


@dataclass(frozen=True)
class ParameterSet:
    # host size and density exponent
    n: int = 501
    delta: float = 0.45
    # block sizes, cycle length, matching deficiency, pattern ratio
    C: int = 3
    C_prime: int = 2
    ell: int = 5
    eta: float = 0.05
    c: float = 0.06
    # regularity tolerances and partition-size caps
    eps1: float = 0.1
    eps2: float = 0.2
    eps3: float = 0.3
    T1: int = 10
    T2: int = 20
    T3: int = 40
    # densifier family count, biclique size
    q: int = 3
    s: int = 2
    # density / size constants
    mu: float = 0.1
    tau: float = 0.1
    gamma: float = 0.1
    rho: float = 0.5
    alpha: float = 0.1
    # the six probabilities; None means "derive"
    p: float | None = None
    p_tilde: float | None = None
    p_prime: float | None = None
    p_tilde_prime: float | None = None
    p_dprime: float | None = None
    p_tilde_dprime: float | None = None
    z: int | None = None
    # desk-scale knobs
    chain_ratio: float = 10.0
    K: int = 3
    xi: float = 1 / 200
    beta: float = 0.5
    meta_mode: str = "relative"
    meta_fraction: float = 0.5
    t0: int = 4
    t_max: int = 32
    reg_trials: int = 20
    n_classes: int = 10
    cleanup_factor: float = 0.25
    case_fraction: float = 0.1
    probe_trials: int = 2
    attempts: int = 3
    search_budget: int = 200_000
    clique_t: int = 2
    blowup_k: int = 1
    resample_budget: int = 2
    max_layers: int | None = None

    def replace(self, **changes) -> "ParameterSet":
        return dataclasses.replace(self, **changes)

    def with_probabilities(self, z: int | None = None) -> "ParameterSet":
        """Fill the derived probabilities; explicit p and p_prime are kept."""
        z = self.z if z is None else z
        return self.replace(**derive_probabilities(self.n, self.delta, self.C, z, p=self.p, p_prime=self.p_prime))

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _root(p: float, k: float) -> float:
    """Solve p = 1 - (1 - x)^k for x."""
    if p >= 1.0:
        return 1.0
    return -math.expm1(math.log1p(-p) / k)


def _power(x: float, k: float) -> float:
    """1 - (1 - x)^k."""
    if x >= 1.0:
        return 1.0 if k > 0 else 0.0
    return -math.expm1(k * math.log1p(-x))


def derive_probabilities(n: int | None = None, delta: float | None = None, C: int = 3, z: int | None = None,
                         p: float | None = None, p_prime: float | None = None) -> dict:
    """The six probabilities.

    p   = n^(delta - 1/2) unless given; p_tilde solves p = 1 - (1 - p_tilde)^(C(C-1)/2)
    p'  = log(n)/n unless given; p_tilde' solves p' = 1 - (1 - p_tilde')^(C^2)
    p'' = 1 - (1 - p')^z and p_tilde'' = 1 - (1 - p_tilde')^z

    z defaults to the expected matching count (n - 1) p / (C - 1), rounded.
    """
    if p is None:
        if n is None or delta is None:
            raise ParameterInfeasible("need n and delta, or p")
        if not (0 < delta < 0.5) or n < 1:
            raise ParameterInfeasible("delta must lie in (0, 1/2) and n >= 1", n=n, delta=delta)
        p = n ** (delta - 0.5)
    if p_prime is None:
        if n is None or n < 1:
            raise ParameterInfeasible("need n for p'")
        p_prime = math.log(n) / n
    if z is None:
        z = int(round((n - 1) * p / (C - 1))) if (n is not None and C > 1) else 1
    pairs = C * (C - 1) / 2
    out = {"p": float(p), "p_prime": float(p_prime), "z": int(z)}
    for name in ("p", "p_prime"):
        if not (0.0 <= out[name] <= 1.0):
            raise ParameterInfeasible(f"{name} = {out[name]} outside [0, 1]")
    out["p_tilde"] = _root(p, pairs) if pairs > 0 else float(p)
    out["p_tilde_prime"] = _root(p_prime, C * C)
    out["p_dprime"] = _power(p_prime, z)
    out["p_tilde_dprime"] = _power(out["p_tilde_prime"], z)
    for name, val in out.items():
        if name != "z" and not (0.0 <= val <= 1.0):
            raise ParameterInfeasible(f"{name} = {val} outside [0, 1]")
    return out


# ------------------------------------------------------------ parameter file

def _coerce(name: str, ftype, raw: str):
    raw = raw.strip()
    t = str(ftype)
    if raw.lower() in ("none", "null", "") and "None" in t:
        return None
    try:
        if t.startswith("int"):
            return int(raw)
        if t.startswith("float"):
            return float(raw)
        if t == "str":
            return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    raise ConfigError(f"cannot parse {name} of type {t}")


def parse_params(text: str, base: ParameterSet | None = None) -> ParameterSet:
    """Parse key=value lines onto ``base``; unknown keys are rejected."""
    base = base or ParameterSet()
    types = {f.name: f.type for f in fields(ParameterSet)}
    changes = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        changes[key] = _coerce(key, types[key], val)
    return base.replace(**changes)


def format_params(p: ParameterSet) -> str:
    return "".join(f"{k}={'none' if v is None else repr(v) if isinstance(v, float) else v}\n" for k, v in p.as_dict().items())


def read_params(path) -> ParameterSet:
    with open(path) as fh:
        return parse_params(fh.read())

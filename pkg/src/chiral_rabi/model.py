"""Model constants, truncation, and their JSON form."""
from dataclasses import dataclass, replace
import cmath
import json
import math

from .errors import InvalidDimension, InvalidParams, NonHermitianParams

HERMITICITY_TOL = 1e-14


def _as_complex_tuple(values):
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise InvalidParams(f"complex entries are [re, im] pairs, got {v!r}")
            v = complex(float(v[0]), float(v[1]))
        out.append(complex(v))
    return tuple(out)


def _conjugate_pairs_ok(values, N):
    return all(
        abs(values[m - 1].conjugate() - values[N - m - 1]) <= HERMITICITY_TOL
        for m in range(1, N)
    )


@dataclass(frozen=True)
class ModelParams:
    """All constants of H_N (and of the alternate H~_N).

    ``alphas[m-1]`` is the level-splitting coupling of ``Z^m``; hermiticity
    requires ``conj(alpha_m) == alpha_{N-m}``.  For N = 3, passing ``phi``
    instead of ``alphas`` sets ``alpha_1 = exp(i phi)``, ``alpha_2 =
    exp(-i phi)``.
    """

    N: int
    Omega: float
    Delta: float
    lam: float
    alphas: tuple = None
    betas: tuple = None
    phi: float = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise InvalidDimension(f"N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        for name in ("Omega", "Delta", "lam"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidParams(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.Omega <= 0:
            raise InvalidParams("Omega must be positive")
        if self.lam < 0:
            raise InvalidParams("lambda must be non-negative")
        if self.phi is not None:
            if self.N != 3:
                raise InvalidParams("phi is only defined for N = 3")
            if self.alphas is not None:
                raise InvalidParams("alphas and phi are mutually exclusive")
            phi = float(self.phi)
            object.__setattr__(self, "phi", phi)
            object.__setattr__(self, "alphas", (cmath.exp(1j * phi), cmath.exp(-1j * phi)))
        elif self.alphas is None:
            object.__setattr__(self, "alphas", tuple(1.0 + 0j for _ in range(self.N - 1)))
        alphas = _as_complex_tuple(self.alphas)
        if len(alphas) != self.N - 1:
            raise InvalidParams(f"need {self.N - 1} alphas, got {len(alphas)}")
        object.__setattr__(self, "alphas", alphas)
        if self.betas is not None:
            betas = _as_complex_tuple(self.betas)
            if len(betas) != self.N - 1:
                raise InvalidParams(f"need {self.N - 1} betas, got {len(betas)}")
            object.__setattr__(self, "betas", betas)
        self.validate()

    @classmethod
    def chiral3(cls, Omega, Delta, lam, phi):
        return cls(N=3, Omega=Omega, Delta=Delta, lam=lam, phi=phi)

    def validate(self):
        if not _conjugate_pairs_ok(self.alphas, self.N):
            raise NonHermitianParams(f"alphas violate conj(a_m) = a_(N-m): {self.alphas}")
        if self.betas is not None and not _conjugate_pairs_ok(self.betas, self.N):
            raise NonHermitianParams(f"betas violate conj(b_m) = b_(N-m): {self.betas}")

    def alpha(self, m):
        """alpha_m for 1 <= m <= N-1."""
        return self.alphas[m - 1]

    def with_(self, **changes):
        """Copy with fields replaced; changing ``phi`` re-derives alphas."""
        if "alphas" not in changes and (self.phi is not None or "phi" in changes):
            changes["alphas"] = None
        if self.phi is not None and "phi" not in changes and changes["alphas"] is not None:
            changes["phi"] = None
        return replace(self, **changes)

    def to_dict(self):
        d = {"N": self.N, "Omega": self.Omega, "Delta": self.Delta, "lambda": self.lam}
        if self.phi is not None:
            d["phi"] = self.phi
        else:
            d["alphas"] = [[a.real, a.imag] for a in self.alphas]
        if self.betas is not None:
            d["betas"] = [[b.real, b.imag] for b in self.betas]
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise InvalidParams("model document must be a JSON object")
        missing = [k for k in ("N", "Omega", "Delta", "lambda") if k not in d]
        if missing:
            raise InvalidParams(f"model document lacks {missing}")
        unknown = set(d) - {"N", "Omega", "Delta", "lambda", "alphas", "betas", "phi"}
        if unknown:
            raise InvalidParams(f"unknown model fields {sorted(unknown)}")
        if "alphas" in d and "phi" in d:
            raise InvalidParams("alphas and phi are mutually exclusive")
        try:
            return cls(
                N=d["N"],
                Omega=d["Omega"],
                Delta=d["Delta"],
                lam=d["lambda"],
                alphas=d.get("alphas"),
                betas=d.get("betas"),
                phi=d.get("phi"),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidParams):
                raise
            raise InvalidParams(str(exc)) from exc

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidParams(f"malformed model JSON: {exc}") from exc
        return cls.from_dict(doc)


@dataclass(frozen=True)
class Truncation:
    """Fock cutoff.  Composite index is ``k * (n_max + 1) + n`` (spin-major)."""

    n_max: int = 80

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise InvalidParams(f"n_max must be a positive integer, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def fock_dim(self):
        return self.n_max + 1

    def dim(self, N):
        return N * (self.n_max + 1)

    def index(self, k, n):
        return k * (self.n_max + 1) + n

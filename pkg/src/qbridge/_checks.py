from typing import NamedTuple


class Check(NamedTuple):
    """A verified identity: measured residual next to its tolerance."""

    name: str
    value: float
    tol: float

    @property
    def passed(self):
        return bool(self.value <= self.tol)

    def as_dict(self):
        return {"name": self.name, "value": float(self.value), "tol": float(self.tol),
                "pass": self.passed}


def raise_if_failed(checks, exc_type, what):
    failed = [c for c in checks if not c.passed]
    if failed:
        detail = ", ".join(f"{c.name}={c.value:.3e} (tol {c.tol:.0e})" for c in failed)
        raise exc_type(f"{what} failed: {detail}", {c.name: c.value for c in checks})

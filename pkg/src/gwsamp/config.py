"""Flat key/value experiment configs.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines
ignored. Values may be scalars or comma-separated lists (for case scans).
Unknown keys are rejected to catch typos early. The key set is documented in
the README.
"""

from __future__ import annotations

KNOWN_KEYS = {
    # synthetic cases and runs
    "p", "s", "n_over_q", "runs", "samples", "burn_in", "seed_offset",
    # HMC step parameters
    "alpha", "beta", "alpha_identity", "alpha_trace", "alpha_laplace",
    "alpha_wishart",
    # sampler selections
    "mass_method", "cover", "samplers", "inner",
    # joint-sampler knobs
    "sigma_e", "n0", "aux_sweeps", "refresh_steps", "mass_prelim", "n_iter",
    "fixed_s", "init_s",
    # glasso / CV
    "folds", "grid_size", "tol", "max_sweeps",
    # data handling
    "train_fraction",
    # harness behaviour
    "max_cliques", "save_traces",
}


class Config:
    """Typed access over the parsed key/value pairs."""

    def __init__(self, values: dict[str, str] | None = None):
        self.values = dict(values or {})
        unknown = set(self.values) - KNOWN_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

    @staticmethod
    def load(path) -> "Config":
        values = {}
        with open(path, "r", encoding="utf-8") as fh:
            for ln, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{ln}: expected 'key = value'")
                key, val = line.split("=", 1)
                values[key.strip()] = val.strip()
        return Config(values)

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def get_int(self, key: str, default: int) -> int:
        v = self.values.get(key)
        return default if v is None else int(v)

    def get_float(self, key: str, default: float) -> float:
        v = self.values.get(key)
        return default if v is None else float(v)

    def get_str(self, key: str, default: str) -> str:
        v = self.values.get(key)
        return default if v is None else v

    def get_float_or_none(self, key: str):
        v = self.values.get(key)
        return None if v in (None, "", "none") else float(v)

    def get_int_list(self, key: str, default: list[int]) -> list[int]:
        v = self.values.get(key)
        return default if v is None else [int(c) for c in v.split(",") if c.strip()]

    def get_float_list(self, key: str, default: list[float]) -> list[float]:
        v = self.values.get(key)
        return default if v is None else [float(c) for c in v.split(",") if c.strip()]

    def get_str_list(self, key: str, default: list[str]) -> list[str]:
        v = self.values.get(key)
        return default if v is None else [c.strip() for c in v.split(",") if c.strip()]

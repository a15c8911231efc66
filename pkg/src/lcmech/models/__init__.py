"""Bundled example model files."""

from importlib import resources

BUNDLED = (
    "free_particle",
    "harmonic_oscillator",
    "conformal_toy_1d",
    "chiral_classical",
    "chiral_lc",
)


def bundled_path(name: str):
    """Filesystem path of a bundled model (name with or without .model)."""
    if not name.endswith(".model"):
        name += ".model"
    path = resources.files(__package__) / name
    if not path.is_file():
        raise FileNotFoundError(f"no bundled model {name!r}; have {BUNDLED}")
    return path

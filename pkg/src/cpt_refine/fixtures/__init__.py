"""Bundled benchmark CPT documents.

``anxiety`` is the 24-row Anxiety CPT (parents Depression, Hypertension,
Sex, SleepDuration) from a published cardiovascular-risk Bayesian network
whose tables were learnt from a large dataset; it serves as the ground
truth throughout the test suite. The ``anxiety_<method>`` documents are the
reference optimal approximations of it, one per structural method.
"""

from importlib.resources import as_file, files
from pathlib import Path

FIXTURE_NAMES = (
    "anxiety",
    "anxiety_pruning",
    "anxiety_divorcing",
    "anxiety_scm",
    "anxiety_ici",
    "anxiety_sici",
)

METHOD_FIXTURES = {
    "pruning": "anxiety_pruning",
    "divorcing": "anxiety_divorcing",
    "scm": "anxiety_scm",
    "ici": "anxiety_ici",
    "sici": "anxiety_sici",
}


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture (without the .json suffix)."""
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}")
    resource = files(__package__).joinpath(f"{name}.json")
    with as_file(resource) as path:
        return Path(path)

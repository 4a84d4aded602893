import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from renormalist import config as cfgmod  # noqa: E402
from renormalist.subforests import counterterm_trees  # noqa: E402
from renormalist.trees import generate_trees, solution_trees  # noqa: E402


@functools.lru_cache(maxsize=None)
def fixture(name):
    """(config, rhs trees, solution trees, counterterm trees) of a bundled equation."""
    cfg = cfgmod.resolve(name)
    rhs = generate_trees(cfg.rule, cfg.alphabet, cfg.target, cfg.cutoffs.rhs)
    sol = solution_trees(cfg.rule, cfg.alphabet, cfg.target, cfg.cutoffs.solution)
    neg = counterterm_trees(rhs + sol, cfg.alphabet)
    return cfg, rhs, sol, neg


@pytest.fixture(params=cfgmod.FIXTURES)
def equation(request):
    return fixture(request.param)

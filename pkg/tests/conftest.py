import pytest

from hotbox.kinematics import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # JIT compilation (or cache load) happens here, outside any timed section.
    _kernels.warmup()

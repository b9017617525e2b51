import pytest

from popcache.models import SystemConfig, build_popularity


@pytest.fixture
def scenario1():
    """
    Scenario 1 configuration factory: N=6000, K_T=50, gamma=gamma_T=0.1, F=1e5
    """
    def make(K: int) -> SystemConfig:
        return SystemConfig(N=6000, K=K, K_T=50, gamma=0.1, gamma_T=0.1, F=100000)
    return make


@pytest.fixture
def scenario2():
    def make(K: int) -> SystemConfig:
        return SystemConfig(N=3000, K=K, K_T=20, gamma=0.02, gamma_T=0.1, F=1000000)
    return make


@pytest.fixture
def toy():
    """
    Eight files, four transmitters at L = 2, four receiver caches with t = 1
    """
    return SystemConfig(N=8, K=40, K_T=4, gamma=0.25, gamma_T=0.5, F=4, Lambda=4)


@pytest.fixture(scope="session")
def zipf():
    cache = {}

    def make(N: int, alpha: float):
        if (N, alpha) not in cache:
            cache[(N, alpha)] = build_popularity(N, alpha)
        return cache[(N, alpha)]
    return make

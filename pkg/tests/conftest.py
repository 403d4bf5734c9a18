import math
import sys

import pytest
from hypothesis import settings

from volsmile import dists

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

# Reference values from mpmath at 40 significant digits (adaptive tanh-sinh
# quadrature of the defining integrals, mpmath.gammainc / betainc, and
# mpmath.diff for spot derivatives).  None of them touch this package.
REF = {
    "bsm_atm": 7.9655674554057962931,             # S0=K=100, sigma=0.2, T=1
    "gamma_call_5": 1.3533528323661269189,        # kappa=2, theta=2.5
    "gamma_put_6": 1.9978974861835375371,
    "student_call_4": 1.6740868848664145209,      # mu=5, nu=1.5
    "student_put_6": 1.6740868848664145209,
    "student3_atm": 0.55132889542179204951,       # sqrt(3)/pi
    "normal_call_5p5": 0.05851012769922547013,    # F=5, sigma_N=0.8, T=0.5
    "loguniform_call_5": 0.66268604018027938883,  # a=3, b=8
    "mixture_call_100": 17.360270978472440212,    # 0.5/0.5 on (4.3, .08), (4.9, .08)
    "P_2.5_3": 0.69378108158672159912,
    "I_0.6_1.5_0.5": 0.25221549635550448845,
    "student_pdf_0_1.5": 0.34073498128869363995,
    "gamma_cdf_5": 0.59399415029016192432,
    "mixvar_0.3_0.7": 0.065492846103720019296,
    "loguniform_b_a3_F5": 7.7370244080757579843,
    "gamma_delta_kappa_5": 0.67667641618306345947,
    "gamma_delta_var_5": 0.42805234137409824702,
    "student_delta_4": 0.77443231636164483784,
}


@pytest.fixture
def m5():
    """S0 = 5, r = q = 0, T = 0.5: the setting of the example smile configs."""
    return dists.MarketParams(5.0, 0.0, 0.0, 0.5)


@pytest.fixture
def m100():
    return dists.MarketParams(100.0, 0.0, 0.0, 1.0)


@pytest.fixture
def carry():
    """Non-zero rates so discounting and the forward are exercised."""
    return dists.MarketParams(5.0, 0.03, 0.01, 0.5)


def calibrated_specs(market):
    """One forward-consistent spec per family."""
    f = market.forward
    return {
        "lognormal": dists.calibrate_forward("lognormal", {"s": 0.2}, market),
        "gamma": dists.calibrate_forward("gamma", {"kappa": 2.0}, market),
        "normal": dists.calibrate_forward("normal", {"sigma_n": 0.3 * f}, market),
        "student_t": dists.calibrate_forward("student_t", {"nu": 2.5}, market),
        "uniform": dists.calibrate_forward("uniform", {"a": 0.6 * f}, market),
        "log_uniform": dists.calibrate_forward("log_uniform", {"a": 0.5 * f}, market),
        "mixture": dists.calibrate_forward("mixture", {
            "components": [{"family": "lognormal", "mu": math.log(0.8 * f), "s": 0.1},
                           {"family": "lognormal", "mu": math.log(1.3 * f), "s": 0.15}],
            "weights": [0.4, 0.6]}, market),
    }


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])

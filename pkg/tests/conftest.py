import pytest

from prodcode.optimizer import optimize

# Reference best codes per overhead (denominators 3..16) and decoder, with n_c in thousands.
REF_OH = list(range(3, 17))
REF_SR = [(8, 3, 76), (8, 3, 28), (9, 3, 201), (9, 3, 147), (9, 3, 93), (9, 3, 39),
          (9, 3, 0), (10, 3, 378), (10, 3, 318), (10, 3, 258), (10, 3, 198),
          (10, 3, 138), (10, 3, 78), (10, 3, 18)]
REF_IBDD = [(8, 4, 16), (8, 3, 28), (9, 4, 98), (9, 4, 26), (9, 3, 93), (9, 3, 39),
            (9, 3, 0), (10, 4, 163), (10, 4, 83), (10, 4, 3), (10, 4, 0),
            (10, 3, 138), (10, 3, 78), (10, 3, 18)]
REF_NC_SR = [32, 52, 96, 132, 175, 223, 261, 404, 497, 585, 681, 783, 893, 1010]
REF_NC_IBDD = [57, 52, 170, 235, 175, 223, 261, 740, 884, 1040, 1047, 783, 893, 1010]


@pytest.fixture(scope="session")
def full_report():
    """Both decoders over all 14 overheads with the default DE settings."""
    return optimize()


_CRITERIA: dict[int, str] = {}


def record_criterion(n: int, ok: bool, detail: str) -> None:
    _CRITERIA[n] = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(_CRITERIA[n])


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])

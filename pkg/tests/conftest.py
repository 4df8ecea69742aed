import pytest

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, title: str, passed: bool, runtime: float, limit: float | None, detail: str) -> str:
    budget = f" (limit {limit:g} s)" if limit is not None else ""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion:>2}: {title} | {detail} | {runtime:.2f} s{budget}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the numba kernels once so timed sections measure steady-state cost."""
    from holoseries import build_generator, g_sequence, h_sequence, models, simulate_paths

    for factory in models.CANONICAL.values():
        spec = factory()
        gen = build_generator(spec)
        g_sequence(gen, [1.0], 4)
        h_sequence(gen, [1.0], 1.0, 4)
        simulate_paths(spec, [0.3], 0.1, n_paths=64, dt=0.05, seed=0)
    return True

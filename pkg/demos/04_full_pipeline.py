"""The whole pipeline from one config file.

Runs every task of the sample project (classification, coverage gaps,
duplicates, contradictions) against the mock backend, then runs it a
second time to show the delta logic reusing the first run's outputs
without a single backend call.

Equivalent to:

    safereq run --config sample_project/params.json --version-tag DEMO
"""

from pathlib import Path

from safereq import MockBackend, run_all

REPO = Path(__file__).resolve().parent.parent
PROJECT = REPO / "sample_project"


def show(report, backend):
    for result in report.results:
        line = f"  {result.name}: {result.status} ({result.detail})"
        if result.backend_calls:
            line += f" [{result.backend_calls} backend calls]"
        print(line)
    if report.report_set is not None:
        print("  reports:", report.report_set.summary_path.parent)
    print("  backend calls in total:", backend.call_count)


def main():
    print("first run (everything executes):")
    backend = MockBackend(PROJECT / "fixtures")
    show(run_all(PROJECT / "params.json", backend=backend, version_tag="DEMO"), backend)

    print("\nsecond run (delta reuses the raw outputs):")
    backend = MockBackend(PROJECT / "fixtures")
    show(run_all(PROJECT / "params.json", backend=backend, version_tag="DEMO"), backend)

    summary = PROJECT / "B_Requirements" / "results" / "reports" / "summary_DEMO.md"
    print("\nsummary report:")
    print(summary.read_text(encoding="utf-8"))


if __name__ == "__main__":
    main()

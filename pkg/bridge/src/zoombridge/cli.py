"""Protocol entry point: ``zoombridge <job.json>``.

Exit codes: 0 ok, 2 usage, 3 malformed job or grid, 4 scoring failure.
Any nonzero status tells the host to abort.
"""

from __future__ import annotations

import sys

from .errors import JobError, ModelError
from .runner import run_job_file


def main(argv: list[str] | None = None) -> int:
    args = sys.argv[1:] if argv is None else argv
    if len(args) != 1 or args[0] in ("-h", "--help"):
        print("usage: zoombridge <job.json>", file=sys.stderr)
        return 2
    try:
        run_job_file(args[0])
    except JobError as exc:
        print(f"zoombridge: {exc}", file=sys.stderr)
        return 3
    except (ModelError, OSError) as exc:
        print(f"zoombridge: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""
Launch the dpdlib autograder in a fresh interpreter.

Categories: A transport, B group communication, C distributed data
structures, D cost model, E runtime harness, F bench programs, G TCP backend
(loopback sockets only), H error handling. Exit status is the autograder's:
0 when every category passes.
"""

import subprocess
import sys
import os

CATEGORIES = {
    'A': 'Transport',
    'B': 'Group Communication',
    'C': 'Distributed Data Structures',
    'D': 'Cost Model',
    'E': 'Runtime Harness',
    'F': 'Bench Programs',
    'G': 'TCP Backend',
    'H': 'Error Handling',
}


def run_autograder():
    """Run autograder.py and relay its report"""
    print("🚀 Running dpdlib autograder: " + ", ".join(f"{k} {v}" for k, v in CATEGORIES.items()))
    print("=" * 60)

    try:
        result = subprocess.run([
            sys.executable,
            os.path.join(os.path.dirname(__file__), 'autograder.py')
        ], capture_output=True, text=True)

        print(result.stdout)

        # simulator warnings (deadlock reports, starved receives) and rank failures are logged here
        if result.stderr:
            print("STDERR:")
            print(result.stderr)

        return result.returncode

    except Exception as e:
        print(f"Error running autograder: {str(e)}")
        return 1


if __name__ == "__main__":
    exit_code = run_autograder()
    verdict = "all categories passed" if exit_code == 0 else "some categories failed"
    print(f"\n{'✅' if exit_code == 0 else '❌'} Autograder finished: {verdict} (exit code {exit_code})")
    sys.exit(exit_code)

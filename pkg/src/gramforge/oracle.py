"""Black-box accept/reject authorities.

Every candidate string the pipeline wants judged goes through an Oracle.
Verdicts are memoized (identical strings are never re-judged within a run)
and backend invocations are counted separately from cache hits, together
with wall-clock time spent in the backend.

Backends: a builtin one that decides membership against a bundled
reference grammar (stands in for closed-source parsers at desk scale), and
external commands in two flavors -- one-shot (candidate on stdin, exit
code 0 accepts) and persistent (one line per query, "1"/"0" responses).

A backend failure (spawn error, timeout, protocol garbage) raises
OracleError; it is never folded into a reject, since a flaky oracle must
abort inference rather than silently poison the grammar.
"""

from __future__ import annotations

import os
import select
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass

from .grammar import Grammar, is_productive, membership

DEFAULT_TIMEOUT_S = 10.0
_TIMEOUT_ENV = "GRAMFORGE_ORACLE_TIMEOUT_MS"


class OracleError(Exception):
    """Backend failure; distinct from a reject verdict."""


@dataclass
class OracleStats:
    queries: int = 0
    oracle_time: float = 0.0
    cache_hits: int = 0


def _timeout_from_env(default: float | None) -> float:
    ms = os.environ.get(_TIMEOUT_ENV)
    if ms is not None:
        return max(0.001, int(ms) / 1000.0)
    return default if default is not None else DEFAULT_TIMEOUT_S


class Oracle:
    """Memoizing wrapper around a backend verdict function."""

    def __init__(self, max_cache: int | None = None):
        self._cache: dict[str, bool] = {}
        self._stats = OracleStats()
        self._lock = threading.Lock()
        self._max_cache = max_cache

    def _query(self, candidate: str) -> bool:
        raise NotImplementedError

    def check(self, candidate: str) -> bool:
        with self._lock:
            if candidate in self._cache:
                self._stats.cache_hits += 1
                return self._cache[candidate]
        t0 = time.perf_counter()
        verdict = self._query(candidate)
        elapsed = time.perf_counter() - t0
        with self._lock:
            self._stats.queries += 1
            self._stats.oracle_time += elapsed
            if candidate not in self._cache:
                if self._max_cache is not None and len(self._cache) >= self._max_cache:
                    self._cache.pop(next(iter(self._cache)))
                self._cache[candidate] = verdict
        return verdict

    def stats(self) -> OracleStats:
        with self._lock:
            return OracleStats(
                self._stats.queries, self._stats.oracle_time, self._stats.cache_hits
            )

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# ---------------------------------------------------------------------------
# builtin backend


class _Scanner:
    """Longest-match lexer over a reference grammar's terminal vocabulary.

    At each position the candidates are the grammar's literal terminals,
    the token table's literal values, and maximal character-class runs.
    Longest match wins; on equal length literals beat token values beat
    class runs (keywords stay reserved), then earlier table entries win.
    """

    def __init__(self, g: Grammar):
        from .grammar import CharClass, Lit

        lits = set()
        for p in g.productions:
            for s in p.rhs:
                if isinstance(s, Lit):
                    lits.add(s.text)
                elif isinstance(s, CharClass):
                    # syntactic-layer classes scan like single anonymous tokens
                    pass
        self.literals = sorted(lits, key=lambda t: (-len(t), t))
        self.classes = []
        for p in g.productions:
            for s in p.rhs:
                if isinstance(s, CharClass) and s not in self.classes:
                    self.classes.append(s)
        self.tokens = list(g.table.entries.items()) if g.table is not None else []
        self.skip_ws = not (g.table.whitespace_sensitive if g.table else False)

    def _class_run(self, cc, text: str, pos: int) -> int:
        n = 0
        limit = len(text) - pos if cc.repeatable else min(1, len(text) - pos)
        while n < limit and cc.contains_char(text[pos + n]):
            n += 1
        return n

    def scan(self, text: str):
        out = []
        pos = 0
        n = len(text)
        while pos < n:
            if self.skip_ws and text[pos] in " \t\r\n":
                pos += 1
                continue
            best = None  # (length, priority, order, element)
            for lit in self.literals:
                if text.startswith(lit, pos):
                    best = (len(lit), 0, 0, lit)
                    break  # literals pre-sorted longest-first
            for order, (tid, entry) in enumerate(self.tokens):
                for v in entry.values:
                    if text.startswith(v, pos):
                        cand = (len(v), 1, order, tid)
                        if best is None or (-cand[0], cand[1], cand[2]) < (-best[0], best[1], best[2]):
                            best = cand
                if entry.ranges:
                    from .grammar import CharClass

                    run = self._class_run(CharClass(entry.ranges, entry.repeatable), text, pos)
                    if run:
                        cand = (run, 2, order, tid)
                        if best is None or (-cand[0], cand[1], cand[2]) < (-best[0], best[1], best[2]):
                            best = cand
            for order, cc in enumerate(self.classes):
                run = self._class_run(cc, text, pos)
                if run:
                    cand = (run, 3, order, text[pos : pos + run])
                    if best is None or (-cand[0], cand[1], cand[2]) < (-best[0], best[1], best[2]):
                        best = cand
            if best is None:
                return None
            out.append(best[3])
            pos += best[0]
        return out


class BuiltinOracle(Oracle):
    """Membership in a reference grammar, applied to raw candidate strings."""

    def __init__(self, reference: Grammar, max_cache: int | None = None):
        super().__init__(max_cache=max_cache)
        if not is_productive(reference, reference.start):
            raise OracleError("reference grammar derives no string")
        self.reference = reference
        self._scanner = _Scanner(reference)

    def _query(self, candidate: str) -> bool:
        tokens = self._scanner.scan(candidate)
        if tokens is None:
            return False
        return membership(self.reference, tokens)


def builtin_from_grammar(reference: Grammar, max_cache: int | None = None) -> BuiltinOracle:
    return BuiltinOracle(reference, max_cache=max_cache)


# ---------------------------------------------------------------------------
# subprocess backends


class SubprocessOracle(Oracle):
    """One subprocess per query: candidate on stdin, exit code 0 accepts."""

    def __init__(
        self,
        command: str | list[str],
        timeout: float | None = None,
        max_parallel: int = 1,
        max_cache: int | None = None,
    ):
        super().__init__(max_cache=max_cache)
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = _timeout_from_env(timeout)
        self._sem = threading.Semaphore(max_parallel)

    def _query(self, candidate: str) -> bool:
        with self._sem:
            try:
                proc = subprocess.run(
                    self.argv,
                    input=candidate.encode("utf-8"),
                    stdout=subprocess.DEVNULL,
                    stderr=subprocess.DEVNULL,
                    timeout=self.timeout,
                )
            except subprocess.TimeoutExpired as e:
                raise OracleError(f"oracle timed out after {self.timeout}s") from e
            except OSError as e:
                raise OracleError(f"cannot run oracle command: {e}") from e
        return proc.returncode == 0


def escape_line(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


class PersistentOracle(Oracle):
    """One long-lived subprocess; line protocol, responses "1"/"0"."""

    def __init__(
        self,
        command: str | list[str],
        timeout: float | None = None,
        max_cache: int | None = None,
    ):
        super().__init__(max_cache=max_cache)
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = _timeout_from_env(timeout)
        self._proc: subprocess.Popen | None = None
        self._buf = b""
        self._io_lock = threading.Lock()

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.DEVNULL,
                )
            except OSError as e:
                raise OracleError(f"cannot start oracle command: {e}") from e
            self._buf = b""
        return self._proc

    def _read_line(self, proc: subprocess.Popen) -> str:
        deadline = time.monotonic() + self.timeout
        fd = proc.stdout.fileno()
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.close()
                raise OracleError(f"oracle timed out after {self.timeout}s")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 4096)
            if not chunk:
                self.close()
                raise OracleError("oracle subprocess closed its output")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("utf-8", "replace").strip()

    def _query(self, candidate: str) -> bool:
        with self._io_lock:
            proc = self._ensure()
            try:
                proc.stdin.write((escape_line(candidate) + "\n").encode("utf-8"))
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as e:
                self.close()
                raise OracleError(f"oracle subprocess pipe failed: {e}") from e
            resp = self._read_line(proc)
        if resp == "1":
            return True
        if resp == "0":
            return False
        self.close()
        raise OracleError(f"oracle protocol error: unexpected response {resp!r}")

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.kill()
                self._proc.wait(timeout=2)
            except Exception:
                pass
            self._proc = None


# ---------------------------------------------------------------------------


def from_spec(
    spec: str,
    persistent: bool = False,
    timeout: float | None = None,
    max_parallel: int = 1,
    max_cache: int | None = None,
) -> Oracle:
    """Build an oracle from a CLI-style spec: "builtin:NAME" or a command."""
    if spec.startswith("builtin:"):
        from . import refbench

        return refbench.builtin_oracle(spec.split(":", 1)[1], max_cache=max_cache)
    if persistent:
        return PersistentOracle(spec, timeout=timeout, max_cache=max_cache)
    return SubprocessOracle(spec, timeout=timeout, max_parallel=max_parallel, max_cache=max_cache)

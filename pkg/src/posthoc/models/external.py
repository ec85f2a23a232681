"""Predictor backed by a child process speaking a line protocol.

Wire protocol (newline-delimited UTF-8 on the child's standard streams):

* handshake, sent once at startup: ``SCHEMA <json>`` where the JSON document
  is the feature schema (including categorical level dictionaries);
* request: ``PREDICT <k>`` followed by k CSV rows in schema order, numeric
  values as decimal literals and categorical values as integer level ids;
* response: k lines, each one decimal literal.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
from collections import deque

import numpy as np

from ..errors import ProtocolError
from ..tabular import FeatureSchema
from .base import SERIALIZED, Predictor

_EOF = object()


class ExternalPredictor(Predictor):
    """Serialized predictor marshalling batches to a child process."""

    concurrency = SERIALIZED

    def __init__(self, command, schema: FeatureSchema, batch_size: int = 1000, timeout: float = 30.0):
        if batch_size < 1:
            raise ProtocolError("batch_size must be at least 1")
        self.schema = schema
        self.batch_size = int(batch_size)
        self.timeout = float(timeout)
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.description = f"external predictor: {' '.join(argv)}"
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ProtocolError(f"could not start prediction process: {exc}") from exc
        self._lock = threading.Lock()
        self._lines: queue.Queue = queue.Queue()
        self._stderr_tail: deque = deque(maxlen=20)
        threading.Thread(target=self._read_stdout, daemon=True).start()
        threading.Thread(target=self._drain_stderr, daemon=True).start()
        self._is_cat = tuple(f.is_categorical for f in schema.features)
        self._send(f"SCHEMA {json.dumps(schema.to_dict(), sort_keys=True)}")

    def _read_stdout(self):
        for line in self._proc.stdout:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(_EOF)

    def _drain_stderr(self):
        for line in self._proc.stderr:
            self._stderr_tail.append(line.rstrip("\n"))

    def _send(self, text: str):
        try:
            self._proc.stdin.write(text + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError) as exc:
            raise self._process_error("prediction process closed its input") from exc

    def _process_error(self, message: str) -> ProtocolError:
        code = self._proc.poll()
        tail = "; ".join(self._stderr_tail)
        detail = f"{message} (exit code {code}"
        if tail:
            detail += f", stderr: {tail}"
        return ProtocolError(detail + ")")

    def _format_row(self, row) -> str:
        fields = []
        for cat, v in zip(self._is_cat, row):
            fields.append(str(int(v)) if cat else repr(float(v)))
        return ",".join(fields)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        out = np.empty(n)
        with self._lock:
            pos = 0
            while pos < n:
                batch = X[pos:pos + self.batch_size]
                k = batch.shape[0]
                payload = [f"PREDICT {k}"] + [self._format_row(r) for r in batch]
                self._send("\n".join(payload))
                for i in range(k):
                    try:
                        line = self._lines.get(timeout=self.timeout)
                    except queue.Empty:
                        raise self._process_error(
                            f"timeout after {self.timeout}s waiting for prediction {i + 1}/{k}"
                        ) from None
                    if line is _EOF:
                        raise self._process_error(
                            f"protocol desync: got {i} of {k} predictions before end of stream"
                        )
                    try:
                        out[pos + i] = float(line)
                    except ValueError:
                        raise ProtocolError(f"non-numeric response {line!r}") from None
                pos += k
        return out

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None or proc.poll() is not None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def external_predictor(command, schema: FeatureSchema, batch_size: int = 1000, timeout: float = 30.0) -> ExternalPredictor:
    """Start a child process and wrap it behind the predictor contract."""
    return ExternalPredictor(command, schema, batch_size=batch_size, timeout=timeout)

import csv
import os
from typing import List, Optional, TextIO

from marl_avoidance.errors import MetricsFormatError
from marl_avoidance.models.run import MetricsRow


def metrics_header(n_agents: int) -> List[str]:
    return ["timestep", "episode"] + [f"agent_{i}_return" for i in range(n_agents)] + ["mean_return", "wall_clock_s"]


def _format(value: float) -> str:
    return repr(float(value))


class MetricsWriter:
    """Append-only metrics CSV; the header is written on open so an empty run still has one."""

    def __init__(self, path: str, n_agents: int):
        self.path = path
        self.n_agents = n_agents
        self._last_timestep: Optional[int] = None
        self._next_line = 2
        self._handle: TextIO = open(path, "w", newline="")
        self._writer = csv.writer(self._handle, lineterminator="\n")
        self._writer.writerow(metrics_header(n_agents))
        self._handle.flush()

    def write(self, row: MetricsRow) -> None:
        if len(row.agent_returns) != self.n_agents:
            raise MetricsFormatError(
                f"row has {len(row.agent_returns)} agent returns, header has {self.n_agents}",
                line_number=self._next_line,
            )
        if self._last_timestep is not None and row.timestep <= self._last_timestep:
            raise MetricsFormatError(
                f"timestep {row.timestep} does not increase past {self._last_timestep}", line_number=self._next_line
            )
        self._last_timestep = row.timestep
        self._writer.writerow(
            [str(row.timestep), str(row.episode)]
            + [_format(value) for value in row.agent_returns]
            + [_format(row.mean_return), _format(row.wall_clock_s)]
        )
        self._next_line += 1
        self._handle.flush()

    def close(self) -> None:
        self._handle.close()

    def __enter__(self) -> "MetricsWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_metrics(path: str) -> List[MetricsRow]:
    """Parse a metrics CSV; any malformed row raises with its 1-based line number."""
    if not os.path.isfile(path):
        raise MetricsFormatError(f"'{path}' is not a file", line_number=0)
    rows: List[MetricsRow] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise MetricsFormatError("file is empty", line_number=1)
        n_agents = len(header) - 4
        if n_agents < 1 or header != metrics_header(n_agents):
            raise MetricsFormatError(f"unexpected header {header}", line_number=1)
        for record in reader:
            line = reader.line_num
            if len(record) != len(header):
                raise MetricsFormatError(f"expected {len(header)} fields, got {len(record)}", line_number=line)
            try:
                row = MetricsRow(
                    timestep=int(record[0]),
                    episode=int(record[1]),
                    agent_returns=[float(value) for value in record[2:-2]],
                    mean_return=float(record[-2]),
                    wall_clock_s=float(record[-1]),
                )
            except ValueError as e:
                raise MetricsFormatError(str(e).splitlines()[0], line_number=line) from e
            if rows and row.timestep <= rows[-1].timestep:
                raise MetricsFormatError("timesteps must strictly increase", line_number=line)
            rows.append(row)
    return rows

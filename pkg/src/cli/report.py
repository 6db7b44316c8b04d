import io
import json
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import pandas as pd

from src.cli.config import RunConfig


@dataclass
class Report:
    command: str
    config: RunConfig
    results: List[Dict] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)
    wall_time: Optional[float] = None
    failed: bool = False
    # Commands with a fixed output contract render json and csv themselves.
    export: Optional[Callable[[str], str]] = None

    def add(self, row: Dict):
        self.results.append(row)

    def to_dict(self) -> Dict:
        data = {
            "command": self.command,
            "config": self.config.to_dict(),
            "results": self.results,
            "summary": self.summary,
        }
        if not self.config.deterministic and self.wall_time is not None:
            data["wall_time"] = round(self.wall_time, 3)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        pd.DataFrame([{k: _cell(v) for k, v in row.items()} for row in self.results]).to_csv(buffer, index=False)
        return buffer.getvalue()

    def to_text(self) -> str:
        lines = [f"# {self.command}"]
        for row in self.results:
            lines.append("  ".join(f"{k}={_cell(v)}" for k, v in row.items()))
        for key, value in self.summary.items():
            lines.append(f"{key}: {_cell(value)}")
        if not self.config.deterministic and self.wall_time is not None:
            lines.append(f"wall time: {self.wall_time:.3f} s")
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        if self.export is not None and self.config.format in ("json", "csv"):
            return self.export(self.config.format)
        if self.config.format == "json":
            return self.to_json()
        if self.config.format == "csv":
            return self.to_csv()
        return self.to_text()


def _cell(value) -> str:
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, sort_keys=True)
    return str(value)

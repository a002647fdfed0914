"""
Run artifacts: metrics.jsonl, resolved config, summaries and comparison tables
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from jinja2 import Template

from coretune.core.config import dump_run_config
from coretune.models.training import TrainingRun
from coretune.schemas.metrics import AblationRow, GradcheckReport, MetricsRecord, TrendReport
from coretune.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.jsonl"
CONFIG_FILE = "config_resolved.conf"
SUMMARY_FILE = "summary.json"


class ReportService:
    """Writes run outputs as plain UTF-8 text"""

    templates_dir = Path(__file__).parent.parent / "templates"
    _template_cache: Dict[str, Template] = {}

    @classmethod
    def _load_template(cls, template_name: str) -> Template:
        """Load and return a text template with caching"""
        if template_name in cls._template_cache:
            return cls._template_cache[template_name]

        template_path = cls.templates_dir / f"{template_name}.md.j2"
        if not template_path.exists():
            raise FileNotFoundError(f"Report template not found: {template_name}")

        with open(template_path, "r", encoding="utf-8") as f:
            template = Template(f.read())

        cls._template_cache[template_name] = template
        return template

    @classmethod
    def _render_template(cls, template_name: str, context: Dict[str, Any]) -> str:
        return cls._load_template(template_name).render(**context)

    @staticmethod
    def metrics_lines(metrics: Sequence[MetricsRecord]) -> str:
        return "".join(record.model_dump_json() + "\n" for record in metrics)

    @staticmethod
    def write_run(out_dir: Path, config: RunConfig, run: TrainingRun) -> Path:
        """metrics.jsonl, config_resolved.conf and summary.json for one run"""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        resolved = config.model_copy(update={"proj_hidden": config.projection_hidden})
        (out_dir / METRICS_FILE).write_text(ReportService.metrics_lines(run.metrics), encoding="utf-8")
        (out_dir / CONFIG_FILE).write_text(dump_run_config(resolved), encoding="utf-8")
        (out_dir / SUMMARY_FILE).write_text(
            run.summary.model_dump_json(indent=2) + "\n", encoding="utf-8"
        )
        logger.info(f"Wrote run outputs to {out_dir}")
        return out_dir

    @classmethod
    def render_ablation_table(
        cls, rows: Sequence[AblationRow], trend: Optional[TrendReport] = None
    ) -> str:
        return cls._render_template(
            "ablation_table",
            {"rows": rows, "trend": trend, "mark": lambda flag: "x" if flag else ""},
        )

    @classmethod
    def write_ablation(
        cls, out_dir: Path, rows: Sequence[AblationRow], trend: Optional[TrendReport] = None
    ) -> str:
        """ablation.json and ablation.md; returns the rendered table"""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = {
            "rows": [row.model_dump() for row in rows],
            "trend": None if trend is None else {**trend.model_dump(), "holds": trend.holds},
        }
        (out_dir / "ablation.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        table = cls.render_ablation_table(rows, trend)
        (out_dir / "ablation.md").write_text(table, encoding="utf-8")
        logger.info(f"Wrote ablation table to {out_dir / 'ablation.md'}")
        return table

    @staticmethod
    def format_gradcheck(report: GradcheckReport) -> str:
        """Fixed-width per-path table for stdout"""
        lines = [f"{'path':<20} {'instances':>9} {'max_rel_err':>12}  status"]
        for entry in report.entries:
            status = "ok" if entry.passed else "FAIL"
            lines.append(
                f"{entry.path:<20} {entry.instances:>9} {entry.max_relative_error:>12.3e}  {status}"
            )
        lines.append(f"max relative error {report.max_relative_error:.3e} (tolerance {report.tolerance:.0e})")
        return "\n".join(lines) + "\n"

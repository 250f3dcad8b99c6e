import csv
import json
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..sim.coding import pack_bitstring  # noqa: E402

logger = logging.getLogger(__name__)

CURVES = ("R_lb", "R_lb_gw", "R_ub_gw", "R_tc", "R_lfu_um")
CSV_HEADER = ("M",) + CURVES

CURVE_LABELS = {
    "R_lb": "lower bound",
    "R_lb_gw": "lower bound, GW-based schemes",
    "R_ub_gw": "GW-LFU-TC",
    "R_tc": "TC (correlation-unaware)",
    "R_lfu_um": "LFU + uncoded multicast",
}


def _format(value) -> str:
    return "" if value is None else f"{value:.12g}"


class ReportService:
    """
    Writes sweep curves, JSON records and simulator transcripts to disk.

    Every writer logs the failure and re-raises on I/O errors.
    """

    def __init__(self, svg_salt: str = "gwcache"):
        self.svg_salt = svg_salt

    def write_csv(self, path, rows: list[dict]):
        """One line per memory point; curves missing from a row are left blank."""
        try:
            with open(path, "w", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(CSV_HEADER)
                for row in rows:
                    writer.writerow([_format(row.get(column)) for column in CSV_HEADER])
            logger.info("Successfully wrote %d rows to '%s'.", len(rows), path)
        except OSError as e:
            logger.error("Could not write CSV file '%s': %s", path, e)
            raise e

    def read_csv(self, path) -> list[dict]:
        try:
            with open(path, newline="") as f:
                return [
                    {key: (float(value) if value != "" else None) for key, value in row.items()}
                    for row in csv.DictReader(f)
                ]
        except OSError as e:
            logger.error("Could not read CSV file '%s': %s", path, e)
            raise e

    def dumps(self, record: dict) -> str:
        return json.dumps(record, indent=4)

    def write_json(self, path, record: dict):
        try:
            with open(path, "w") as f:
                f.write(self.dumps(record) + "\n")
            logger.info("Successfully wrote JSON record to '%s'.", path)
        except OSError as e:
            logger.error("Could not write JSON file '%s': %s", path, e)
            raise e

    def write_svg(self, path, rows: list[dict], title: str = "Rate-memory trade-off"):
        """Line chart of every curve present in the rows, rate against memory in bits/symbol."""
        memories = [row["M"] for row in rows]
        with plt.rc_context({"svg.hashsalt": self.svg_salt}):
            fig, ax = plt.subplots(figsize=(8, 5))
            for curve in CURVES:
                values = [row.get(curve) for row in rows]
                if all(value is None for value in values):
                    continue
                points = [(m, v) for m, v in zip(memories, values) if v is not None]
                ax.plot([m for m, _ in points], [v for _, v in points], label=CURVE_LABELS[curve], linewidth=1.5)
            ax.set_xlabel("M (bits/symbol)")
            ax.set_ylabel("R (bits/symbol)")
            ax.set_title(title)
            ax.grid(True, alpha=0.3)
            ax.legend()
            try:
                fig.savefig(path, format="svg", metadata={"Date": None})
                logger.info("Successfully wrote chart to '%s'.", path)
            except OSError as e:
                logger.error("Could not write SVG file '%s': %s", path, e)
                raise e
            finally:
                plt.close(fig)

    def write_transcripts(self, path, run):
        """
        Raw codewords of a simulator run, point by point and demand by demand
        in (1,1), (1,2), (2,1), (2,2) order, each a length-prefixed bitstring.
        """
        try:
            with open(path, "wb") as f:
                for point in run.points:
                    for transcript in point.transcripts:
                        f.write(pack_bitstring(transcript.codeword))
            logger.info("Successfully wrote transcripts of %d points to '%s'.", len(run.points), path)
        except OSError as e:
            logger.error("Could not write transcript dump '%s': %s", path, e)
            raise e

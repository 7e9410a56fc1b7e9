# run_logger.py
"""
Logger utility for simulation runs and sweeps
"""

import os
import sys
from datetime import datetime, timezone


class RunLogger:
    def __init__(self, run_id=None, quiet=False, stream=None):
        self.run_id = run_id or os.environ.get("MACBENCH_RUN_ID")
        self.quiet = quiet
        # Standard output carries CSV, so the console sink defaults to stderr
        self.stream = stream
        self.records = []
        self.status = None

    def log(self, level, message, technique=None, component=None):
        """Log a message to the console and keep a structured record of it"""
        record = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "run_id": self.run_id,
            "level": level,
            "message": message[:1000],
            "technique": technique,
            "component": component,
        }
        self.records.append(record)

        if not self.quiet:
            stream = self.stream or sys.stderr
            print(f"[{level}] {message}", file=stream, flush=True)

    def info(self, message, technique=None, component=None):
        self.log("INFO", message, technique, component)

    def warning(self, message, technique=None, component=None):
        self.log("WARNING", message, technique, component)

    def error(self, message, technique=None, component=None):
        self.log("ERROR", message, technique, component)

    def errors(self, technique=None):
        """Return the error records, optionally only those for one technique"""
        return [
            r for r in self.records
            if r["level"] == "ERROR" and (technique is None or r["technique"] == technique)
        ]

    def update_run_status(self, status, error_message=None, records_processed=None):
        """Record the final status of a run"""
        self.status = {
            "status": status,
            "error_message": error_message,
            "records_processed": records_processed,
            "updated_at": datetime.now(timezone.utc).isoformat(),
        }
        if error_message:
            self.error(f"Run {status}: {error_message}", component="status")
        else:
            self.info(f"Run {status}. Records processed: {records_processed}", component="status")

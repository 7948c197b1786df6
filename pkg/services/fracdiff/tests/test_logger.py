"""
Tests for fracdiff.logger.
"""

import logging
import os
import shutil
import tempfile
import unittest
from logging.handlers import RotatingFileHandler

from fracdiff.logger import command_logger, setup_logger, setup_service_logger


class TestLogger(unittest.TestCase):
    def setUp(self):
        self.log_dir = tempfile.mkdtemp()
        self.log_file = os.path.join(self.log_dir, "test.log")
        self.saved_handlers = {
            name: logging.getLogger(name).handlers.copy() for name in list(logging.root.manager.loggerDict)
        }

    def tearDown(self):
        for name, handlers in self.saved_handlers.items():
            logger = logging.getLogger(name)
            for handler in logger.handlers:
                if handler not in handlers:
                    handler.close()
            logger.handlers = handlers
        shutil.rmtree(self.log_dir, ignore_errors=True)

    def test_setup_logger_file_only(self):
        logger = setup_logger("fracdiff_test_file", log_file=self.log_file, console=False)

        self.assertEqual(len(logger.handlers), 1)
        self.assertIsInstance(logger.handlers[0], RotatingFileHandler)

        logger.info("Test message to file")
        logger.handlers[0].flush()
        with open(self.log_file, "r") as f:
            self.assertIn("Test message to file", f.read())

    def test_setup_logger_console_only(self):
        logger = setup_logger("fracdiff_test_console", log_file=None, console=True)

        self.assertEqual(len(logger.handlers), 1)
        self.assertIsInstance(logger.handlers[0], logging.StreamHandler)

    def test_setup_logger_replaces_handlers(self):
        setup_logger("fracdiff_test_twice", log_file=self.log_file, console=True)
        logger = setup_logger("fracdiff_test_twice", log_file=None, console=True)

        self.assertEqual(len(logger.handlers), 1)

    def test_setup_logger_level(self):
        self.assertEqual(setup_logger("fracdiff_level_str", log_level="ERROR").level, logging.ERROR)
        self.assertEqual(setup_logger("fracdiff_level_int", log_level=logging.DEBUG).level, logging.DEBUG)

    def test_setup_service_logger(self):
        config = {
            "log_level": "DEBUG",
            "log_file": self.log_file,
            "console_logs": False,
            "log_format": "%(levelname)s - %(message)s",
        }
        logger = setup_service_logger(config)

        self.assertEqual(logger.name, "fracdiff")
        self.assertEqual(logger.level, logging.DEBUG)

        logging.getLogger("fracdiff.stefan").debug("Newton step 3 converged")
        for handler in logger.handlers:
            handler.flush()
        with open(self.log_file, "r") as f:
            self.assertIn("DEBUG - Newton step 3 converged", f.read())

    def test_setup_service_logger_log_dir(self):
        logger = setup_service_logger({"log_level": "INFO", "log_dir": self.log_dir, "console_logs": False})

        expected = os.path.join(self.log_dir, "fracdiff.log")
        self.assertTrue(os.path.exists(expected))
        logger.info("Test service logger with log_dir")
        for handler in logger.handlers:
            handler.flush()
        with open(expected, "r") as f:
            self.assertIn("Test service logger with log_dir", f.read())

    def test_command_logger_writes_through_service_handlers(self):
        setup_service_logger({"log_level": "INFO", "log_file": self.log_file, "console_logs": False})

        logger = command_logger("solve-stefan")
        self.assertEqual(logger.name, "fracdiff.cli.solve_stefan")

        logger.info("Starting solve-stefan")
        for handler in logging.getLogger("fracdiff").handlers:
            handler.flush()
        with open(self.log_file, "r") as f:
            self.assertIn("fracdiff.cli.solve_stefan - INFO - Starting solve-stefan", f.read())


if __name__ == "__main__":
    unittest.main()

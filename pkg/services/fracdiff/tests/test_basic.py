"""Basic tests for fracdiff."""

import unittest


class TestFracdiff(unittest.TestCase):
    """Test package basics."""

    def test_import(self):
        """Test that the package can be imported."""
        import fracdiff

        self.assertIsNotNone(fracdiff.__version__)

    def test_cli_entry_point(self):
        from fracdiff.cli import main

        self.assertTrue(callable(main))


if __name__ == "__main__":
    unittest.main()

"""Unit tests for the secrecy simulator."""

import unittest

if __name__ == "__main__":
    unittest.main()

import math
import unittest

from pysecrecy.config import PilotDesign
from pysecrecy.converters import (
    AutoConverter,
    ChoiceConverter,
    DecibelConverter,
    DegreeConverter,
    float_converter,
    float_list_converter,
    format_float,
    int_converter,
)


class TestDecibelConverter(unittest.TestCase):
    converter = DecibelConverter()

    def test_from_unit(self):
        print("Testing dB to linear conversion")

        print("Testing -infinity dB == 0")
        val = self.converter.from_unit(-math.inf)

        self.assertEqual(val, 0.0)

        print("Testing 10 dB == 10")
        val = self.converter.from_unit(10.0)

        self.assertAlmostEqual(val, 10.0, 12)

        print("Testing -3 dB ~= 0.5")
        val = self.converter.from_unit(-3.0)

        self.assertAlmostEqual(val, 0.501187, 6)

    def test_to_unit(self):
        print("Testing linear to dB conversion")

        print("Testing 0 == -infinity dB")
        db = self.converter.to_unit(0.0)

        self.assertEqual(db, -math.inf)

        print("Testing 100 == 20 dB")
        db = self.converter.to_unit(100.0)

        self.assertAlmostEqual(db, 20.0, 12)

        with self.assertRaises(ValueError):
            self.converter.to_unit(-1.0)


class TestDegreeConverter(unittest.TestCase):
    converter = DegreeConverter()

    def test_from_unit(self):
        self.assertAlmostEqual(self.converter.from_unit(6.0), 0.104720, 6)
        self.assertAlmostEqual(self.converter.from_unit(180.0), math.pi, 12)

    def test_to_unit(self):
        self.assertAlmostEqual(self.converter.to_unit(math.pi / 2), 90.0, 12)


class TestTextConverters(unittest.TestCase):
    def test_numbers(self):
        self.assertEqual(int_converter.from_text(" 128 "), 128)
        self.assertEqual(float_converter.from_text("0.5"), 0.5)

        with self.assertRaises(ValueError):
            int_converter.from_text("1.5")

        with self.assertRaises(ValueError):
            float_converter.from_text("half")

    def test_list(self):
        self.assertEqual(
            float_list_converter.from_text("1, 0.5,2"), (1.0, 0.5, 2.0)
        )
        self.assertEqual(float_list_converter.to_text((1.0, 0.5)), "1,0.5")

        with self.assertRaises(ValueError):
            float_list_converter.from_text(" , ")

    def test_choice(self):
        converter = ChoiceConverter(PilotDesign)

        self.assertEqual(
            converter.from_text("unitary_overlapping"),
            PilotDesign.UNITARY_OVERLAPPING,
        )
        self.assertEqual(
            converter.options, ["time_orthogonal", "unitary_overlapping"]
        )

        with self.assertRaises(ValueError):
            converter.from_text("random")

    def test_auto(self):
        converter = AutoConverter(float_converter)

        self.assertIsNone(converter.from_text("auto"))
        self.assertIsNone(converter.from_text(" AUTO "))
        self.assertEqual(converter.from_text("2.5"), 2.5)
        self.assertEqual(converter.to_text(None), "auto")

    def test_format_float(self):
        self.assertEqual(format_float(1 / 3), "0.333333333")
        self.assertEqual(format_float(2.0), "2")
        self.assertEqual(format_float(math.inf), "inf")


if __name__ == "__main__":
    unittest.main()

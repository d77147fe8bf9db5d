"""Test suite for the keyword search engine."""

"""Unit test package for localmix."""

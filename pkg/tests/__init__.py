"""
Test suite for ergoflow.
"""

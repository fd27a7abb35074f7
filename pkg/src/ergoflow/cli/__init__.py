"""
CLI module for ergoflow.

Provides the construct, verify, flow, probe and export commands.
"""

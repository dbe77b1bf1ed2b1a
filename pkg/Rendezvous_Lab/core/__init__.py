"""
Tests for Rendezvous Lab.
"""

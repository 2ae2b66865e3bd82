"""Shared services (atomic writes, fingerprints)"""

"""Shared Pydantic schemas (DTOs)"""

"""Base building blocks shared across modules"""

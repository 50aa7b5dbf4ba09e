# Test suite for GlueLLM

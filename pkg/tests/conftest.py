def pytest_configure(config):
    config.addinivalue_line(
        "markers", "full: expensive full-budget acceptance runs")

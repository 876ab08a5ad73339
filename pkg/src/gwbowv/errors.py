class ToolkitError(ValueError):
    """Error carrying a stable machine-readable ``code``.

    The CLI prints ``code`` verbatim so callers can branch on it.
    """

    def __init__(self, code, message=""):
        self.code = code
        self.message = message
        super().__init__(f"{code}: {message}" if message else code)

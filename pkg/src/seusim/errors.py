"""Exception hierarchy shared by every stage of the pipeline."""


class SeusimError(Exception):
    """Base class for all errors raised by this package."""


class NetlistError(SeusimError, ValueError):
    pass


class VerilogSyntaxError(NetlistError):
    def __init__(self, line, col, expected, found=None):
        self.line, self.col, self.expected, self.found = line, col, expected, found
        msg = f"line {line}, col {col}: expected {expected}"
        if found is not None:
            msg += f", found {found!r}"
        super().__init__(msg)


class UnsupportedCell(NetlistError):
    def __init__(self, kind, instance=None):
        self.kind, self.instance = kind, instance
        where = f" (instance {instance})" if instance else ""
        super().__init__(f"unsupported cell kind {kind}{where}")


class ConnectivityError(NetlistError):
    pass


class UnconnectedPin(ConnectivityError):
    def __init__(self, cell, pin):
        self.cell, self.pin = cell, pin
        super().__init__(f"pin {pin} of cell {cell} is not connected")


class UndrivenNet(ConnectivityError):
    def __init__(self, net):
        self.net = net
        super().__init__(f"net {net} has no driver")


class MultipleDrivers(ConnectivityError):
    def __init__(self, net):
        self.net = net
        super().__init__(f"net {net} has more than one driver")


class SchemaError(NetlistError):
    def __init__(self, path, reason):
        self.path, self.reason = path, reason
        super().__init__(f"{path}: {reason}")


class UnknownCell(SeusimError, KeyError):
    def __init__(self, cell):
        self.cell = cell
        super().__init__(cell)

    def __str__(self):
        return f"unknown cell {self.cell}"


class ElaborationError(SeusimError):
    pass


class CombinationalLoop(ElaborationError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("combinational loop through " + " -> ".join(self.cycle))


class MultiClock(ElaborationError):
    def __init__(self, clocks):
        self.clocks = sorted(clocks)
        super().__init__("flip-flops use more than one clock: " + ", ".join(self.clocks))


class ArityMismatch(SeusimError, ValueError):
    def __init__(self, expected, got):
        self.expected, self.got = expected, got
        super().__init__(f"expected {expected} input bits, got {got}")


class ConfigError(SeusimError, ValueError):
    pass


class TooLarge(ConfigError):
    def __init__(self, needed_runs):
        self.needed_runs = needed_runs
        super().__init__(f"exhaustive stimulus would need {needed_runs} runs")


class DimensionMismatch(ConfigError):
    pass


class ZeroRuns(SeusimError, ValueError):
    def __init__(self):
        super().__init__("error matrix holds zero runs")


class ZeroWeightSum(SeusimError, ValueError):
    def __init__(self):
        super().__init__("output-bit weights sum to zero")

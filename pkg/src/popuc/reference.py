"""Published reference values for the n = 5 tridiagonal Toeplitz example.

Each entry is (block label, t, printed arguments).  Arguments are kept as the
printed strings so comparisons can honour the printed precision, which varies
from 3 to 6 decimals.  Rows without a block label are those listed as not
belonging to any certified set.
"""

from __future__ import annotations

TABLE1_N = 5

TABLE1 = (
    ("I++&H-", -9.0, ("0.185831", "0.335069", "0.578815", "0.86836", "1.11515")),
    ("I++&H-", -7.0, ("0.382408", "0.605763", "0.933046", "1.28985", "1.55583")),
    ("I++&H-", -6.3, ("0.435125", "0.687466", "1.04999", "1.4372", "1.7185")),
    (None, -5.0, ("0.444007", "0.725935", "1.16298", "1.63852", "1.98166")),
    (None, -4.5, ("0.418563", "0.709818", "1.18639", "1.71359", "2.0937")),
    (None, -4.0, ("0.388862", "0.697837", "1.22427", "1.8118", "2.22885")),
    ("I++&H-", -3.0, ("0.402512", "0.783405", "1.44259", "2.14272", "2.59102")),
    ("I++&H-", -2.0, ("0.639983", "1.14671", "1.94338", "2.6444", "3.02789")),
    ("I++&H-", -1.9, ("0.676005", "1.19954", "2.0053", "2.69728", "3.07083")),
    (None, -1.5, ("0.837019", "1.43245", "2.25954", "2.90327", "3.2362")),
    (None, 0.0, ("1.602", "2.41331", "3.14159", "3.56758", "3.77881")),
    (None, 1.6, ("2.95322", "3.69139", "4.08756", "4.26589", "4.34323")),
    ("I+-&H+", 1.8, ("3.24452", "3.8919", "4.21492", "4.35617", "4.41543")),
    ("I+-&H+", 2.0, ("3.56526", "4.09244", "4.33892", "4.44364", "4.49258")),
    ("I+-&H+", 3.0, ("4.72952", "4.75027", "4.78687", "4.86612", "5.14634")),
    (None, 3.5, ("4.83891", "4.88426", "4.95832", "5.08044", "5.3373")),
    (None, 4.0, ("4.91632", "4.96699", "5.05207", "5.18974", "5.38445")),
    (None, 5.0, ("5.00418", "5.04361", "5.12066", "5.24861", "5.41438")),
)


def printed_tolerance(text: str, slack: float = 1e-9) -> float:
    """Half a unit in the last printed decimal place, plus slack."""
    decimals = len(text.split(".", 1)[1]) if "." in text else 0
    return 0.5 * 10.0 ** (-decimals) + slack

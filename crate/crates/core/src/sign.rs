use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

/// Relative dead-band: a value counts as zero when `|v| < DEADBAND · scale`.
pub const DEADBAND: f64 = 1e-9;

/// Uniform sign of a collection of values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
    /// Values of both signs beyond the dead-band, or a mix of signed and zero values.
    Mixed,
}

impl Sign {
    pub fn of(value: f64, deadband: f64) -> Sign {
        if value.abs() < deadband || value == 0.0 {
            Sign::Zero
        } else if value > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    /// Strict uniform sign: `Positive` only if every value is beyond the
    /// dead-band on the positive side, `Zero` only if every value is inside it.
    pub fn uniform<I: IntoIterator<Item = f64>>(values: I, deadband: f64) -> Sign {
        let (mut pos, mut neg, mut zero) = (false, false, false);
        for v in values {
            match Sign::of(v, deadband) {
                Sign::Positive => pos = true,
                Sign::Negative => neg = true,
                _ => zero = true,
            }
        }
        match (pos, neg, zero) {
            (true, false, false) => Sign::Positive,
            (false, true, false) => Sign::Negative,
            (false, false, _) => Sign::Zero,
            _ => Sign::Mixed,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Mixed => "mixed",
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
            s => s,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" => Ok(Sign::Positive),
            "-" => Ok(Sign::Negative),
            "0" => Ok(Sign::Zero),
            "mixed" => Ok(Sign::Mixed),
            other => Err(format!("unknown sign `{other}`")),
        }
    }
}

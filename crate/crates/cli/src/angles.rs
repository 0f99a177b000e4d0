//! Angle arguments: plain decimal radians or symbolic multiples of pi, so
//! special points like `g2(pi)` are exact on the command line.

/// Parse an angle token.
///
/// Accepted forms: decimal radians (`1.5708`, `-2e-3`) or a multiple of pi
/// written as `[coef][*]pi[/div]` with `pi` or `π` (case-insensitive):
/// `pi`, `-pi/2`, `2pi/3`, `0.5pi`, `3*pi/4`.
pub fn parse_angle(token: &str) -> Result<f64, String> {
    let lower = token.trim().to_ascii_lowercase().replace('π', "pi");
    let value = if let Some(pos) = lower.find("pi") {
        let coef_str = lower[..pos].strip_suffix('*').unwrap_or(&lower[..pos]);
        let coef = match coef_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            s => s.parse::<f64>().map_err(|_| bad(token))?,
        };
        let rest = &lower[pos + 2..];
        let div = if rest.is_empty() {
            1.0
        } else {
            let d = rest
                .strip_prefix('/')
                .ok_or_else(|| bad(token))?
                .parse::<f64>()
                .map_err(|_| bad(token))?;
            if d == 0.0 {
                return Err(format!("division by zero in angle '{token}'"));
            }
            d
        };
        coef * std::f64::consts::PI / div
    } else {
        lower.parse::<f64>().map_err(|_| bad(token))?
    };
    if !value.is_finite() {
        return Err(bad(token));
    }
    Ok(value)
}

fn bad(token: &str) -> String {
    format!("cannot parse angle '{token}' (expected decimal radians or a multiple of pi like 'pi/2', '-3pi/4', '0.5pi')")
}

/// Parses `start:stop:step` (inclusive), a comma list, or a single value.
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("'{t}' is not a number"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(format!("range {s} needs start ≤ stop and a positive step"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| a + i as f64 * step).collect())
        }
        [one] => one.split(',').map(num).collect(),
        _ => Err(format!(
            "expected start:stop:step or a comma list, got '{s}'"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(
            parse_values("-5:15:5").unwrap(),
            vec![-5.0, 0.0, 5.0, 10.0, 15.0]
        );
        assert_eq!(parse_values("0:1:0.25").unwrap().len(), 5);
        assert_eq!(parse_values("3").unwrap(), vec![3.0]);
        assert_eq!(parse_values("1,2.5,-4").unwrap(), vec![1.0, 2.5, -4.0]);
        assert!(parse_values("5:0:1").is_err());
        assert!(parse_values("0:5:0").is_err());
        assert!(parse_values("a").is_err());
    }
}

use super::EvalError;
use crate::label::{ClassLabel, NUM_CLASSES};

/// Cohen's kappa `(p_o − p_e) / (1 − p_e)` between two label sequences.
/// Two constant, identical sequences agree perfectly and give 1.
pub fn cohen_kappa(a: &[ClassLabel], b: &[ClassLabel]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = a.len() as f64;
    let mut ma = [0usize; NUM_CLASSES];
    let mut mb = [0usize; NUM_CLASSES];
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        ma[x.index()] += 1;
        mb[y.index()] += 1;
        agree += usize::from(x == y);
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = ma.iter().zip(&mb).map(|(&x, &y)| (x as f64 / n) * (y as f64 / n)).sum();
    if p_e == 1.0 {
        return Ok(if p_o == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::*;

    #[test]
    fn worked_example() {
        let a = [AgeCb, AgeCb, Bipolar, Bipolar];
        let b = [AgeCb, Bipolar, Bipolar, Bipolar];
        assert_eq!(cohen_kappa(&a, &b).unwrap(), 0.5);
        assert_eq!(cohen_kappa(&b, &a).unwrap(), 0.5);
    }

    #[test]
    fn identical_and_constant() {
        let a = [Stress, Suicide, Stress];
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&[Stress; 3], &[Stress; 3]).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        assert_eq!(cohen_kappa(&[], &[]), Err(EvalError::Empty));
        assert_eq!(cohen_kappa(&[Stress], &[]), Err(EvalError::LengthMismatch(1, 0)));
    }
}

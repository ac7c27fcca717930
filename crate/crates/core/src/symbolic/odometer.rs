//! Dyadic odometer on finite windows (bit 0 is the least significant).

use crate::error::{Error, Result};

/// Add one with carry. When the carry runs past the window, further bits are
/// pulled from `extend(index)` until it resolves, up to `limit` bits total.
pub fn add_one(
    window: &[u8],
    limit: usize,
    mut extend: impl FnMut(usize) -> Result<u8>,
) -> Result<Vec<u8>> {
    let mut out = window.to_vec();
    let mut i = 0;
    loop {
        if i == out.len() {
            if i >= limit {
                return Err(Error::WindowExhausted { limit });
            }
            out.push(extend(i)?);
        }
        if out[i] == 0 {
            out[i] = 1;
            return Ok(out);
        }
        out[i] = 0;
        i += 1;
    }
}

/// Add one modulo `2^len`; the carry out of the window is dropped.
pub fn add_one_wrapping(window: &[u8]) -> Vec<u8> {
    let mut out = window.to_vec();
    for bit in out.iter_mut() {
        if *bit == 0 {
            *bit = 1;
            break;
        }
        *bit = 0;
    }
    out
}

/// Index of the first disagreement, if any, within the common length.
pub fn first_difference(x: &[u8], y: &[u8]) -> Option<usize> {
    x.iter().zip(y).position(|(a, b)| a != b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carries() {
        let none = |_| -> Result<u8> { unreachable!() };
        assert_eq!(add_one(&[1, 1, 0, 1], 64, none).unwrap(), vec![0, 0, 1, 1]);
        assert_eq!(add_one(&[0, 1, 1], 64, none).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn all_ones_extends_window() {
        let tail = [1u8, 1, 0, 1];
        let out = add_one(&[1, 1], 64, |i| Ok(tail[i - 2])).unwrap();
        assert_eq!(out, vec![0, 0, 0, 0, 1]);
        assert!(add_one(&[1, 1], 3, |_| Ok(1)).is_err());
    }

    #[test]
    fn wrapping_drops_carry() {
        assert_eq!(add_one_wrapping(&[1, 1, 1]), vec![0, 0, 0]);
        assert_eq!(add_one_wrapping(&[1, 0, 1]), vec![0, 1, 1]);
    }
}

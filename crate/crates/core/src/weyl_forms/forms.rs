//! Sign bookkeeping for dx factors stored as bitmasks in increasing index order.

/// Bitmask of a set of dx indices (bit `i` ↔ dx^{i+1}).
pub type FormMask = u8;

pub fn degree(mask: FormMask) -> u32 {
    mask.count_ones()
}

pub fn indices(mask: FormMask) -> impl Iterator<Item = usize> {
    (0..8).filter(move |i| mask & (1 << i) != 0)
}

pub fn from_indices(idx: &[usize]) -> Option<(i32, FormMask)> {
    let mut mask = 0u8;
    let mut sign = 1;
    for &i in idx {
        let (s, m) = wedge(mask, 1 << i)?;
        sign *= s;
        mask = m;
    }
    Some((sign, mask))
}

/// dx^S · dx^T = sign · dx^{S∪T}, or `None` when S ∩ T ≠ ∅.
pub fn wedge(a: FormMask, b: FormMask) -> Option<(i32, FormMask)> {
    if a & b != 0 {
        return None;
    }
    // one transposition for every pair (i ∈ a, j ∈ b) with i > j
    let mut swaps = 0;
    for j in indices(b) {
        swaps += (a >> (j + 1)).count_ones();
    }
    Some((if swaps % 2 == 0 { 1 } else { -1 }, a | b))
}

/// dx^i · dx^S.
pub fn left_mul(i: usize, s: FormMask) -> Option<(i32, FormMask)> {
    wedge(1 << i, s)
}

/// Contraction i(∂/∂x^k) dx^S.
pub fn contract(k: usize, s: FormMask) -> Option<(i32, FormMask)> {
    if s & (1 << k) == 0 {
        return None;
    }
    let below = (s & ((1u8 << k) - 1)).count_ones();
    Some((if below % 2 == 0 { 1 } else { -1 }, s & !(1 << k)))
}

pub fn render(mask: FormMask) -> String {
    indices(mask).map(|i| format!("dx{}", i + 1)).collect::<Vec<_>>().join("")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_signs() {
        assert_eq!(wedge(0b01, 0b10), Some((1, 0b11)));
        assert_eq!(wedge(0b10, 0b01), Some((-1, 0b11)));
        assert_eq!(wedge(0b01, 0b01), None);
        // dx3 · dx1dx2 = dx1dx2dx3
        assert_eq!(wedge(0b100, 0b011), Some((1, 0b111)));
        // dx2 · dx1dx3 = −dx1dx2dx3
        assert_eq!(wedge(0b010, 0b101), Some((-1, 0b111)));
    }

    #[test]
    fn contraction_signs() {
        assert_eq!(contract(0, 0b11), Some((1, 0b10)));
        assert_eq!(contract(1, 0b11), Some((-1, 0b01)));
        assert_eq!(contract(2, 0b11), None);
    }

    #[test]
    fn contraction_undoes_left_multiplication() {
        for s in 0u8..16 {
            for k in 0..4 {
                if let Some((sg, m)) = left_mul(k, s) {
                    // i(∂_k)(dx^k dx^S) = dx^S when k ∉ S
                    let (sc, back) = contract(k, m).unwrap();
                    assert_eq!(back, s);
                    assert_eq!(sg * sc, 1);
                }
            }
        }
    }

    #[test]
    fn index_lists() {
        assert_eq!(from_indices(&[1, 0]), Some((-1, 0b11)));
        assert_eq!(from_indices(&[0, 2, 1]), Some((-1, 0b111)));
        assert_eq!(from_indices(&[0, 0]), None);
    }
}

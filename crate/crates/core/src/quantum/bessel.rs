/// Bessel functions of the first kind `J_0(x) … J_max_order(x)` for `x ≥ 0`.
///
/// Miller's backward recurrence `J_{k−1} = (2k/x) J_k − J_{k+1}` started well
/// above both `max_order` and `x`, normalised with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, max_order: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j_sequence needs finite x >= 0, got {x}");
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let reach = (max_order as f64).max(x);
    let mut start = reach.ceil() as usize + 30 + (60.0 * reach).sqrt().ceil() as usize;
    start += start % 2;

    const BIG: f64 = 1e250;
    let mut next = 0.0; // J_{k+1}
    let mut current = 1e-300; // J_k
    let mut norm_sum = 0.0;
    for k in (1..=start).rev() {
        if k <= max_order {
            out[k] = current;
        }
        if k % 2 == 0 {
            norm_sum += 2.0 * current;
        }
        let previous = 2.0 * k as f64 / x * current - next;
        next = current;
        current = previous;
        if current.abs() > BIG {
            current /= BIG;
            next /= BIG;
            norm_sum /= BIG;
            for v in out.iter_mut() {
                *v /= BIG;
            }
        }
    }
    out[0] = current;
    norm_sum += current;
    for v in out.iter_mut() {
        *v /= norm_sum;
    }
    out
}

//! In-place gate kernels on amplitude vectors, shared by the statevector
//! simulator and the unitary builder.

use crate::scalar::{Real, C};

pub(crate) type Mat2<T> = [[C<T>; 2]; 2];

/// Applies a 2x2 unitary to qubit `k` of a `2^n` amplitude vector.
pub(crate) fn apply_1q<T: Real>(amps: &mut [C<T>], k: usize, u: &Mat2<T>) {
    let bit = 1usize << k;
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i in base..base + bit {
            let a0 = amps[i];
            let a1 = amps[i | bit];
            amps[i] = u[0][0] * a0 + u[0][1] * a1;
            amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
        base += bit << 1;
    }
}

/// Flips `target` on basis states where `control` is set.
pub(crate) fn apply_cx<T: Real>(amps: &mut [C<T>], control: usize, target: usize) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for i in 0..amps.len() {
        if i & cb != 0 && i & tb == 0 {
            amps.swap(i, i | tb);
        }
    }
}

pub(crate) fn apply_swap<T: Real>(amps: &mut [C<T>], a: usize, b: usize) {
    let (ab, bb) = (1usize << a, 1usize << b);
    for i in 0..amps.len() {
        if i & ab != 0 && i & bb == 0 {
            amps.swap(i, (i & !ab) | bb);
        }
    }
}

//! Minimal FFI onto the system LAPACK's divide-and-conquer symmetric
//! eigensolver (`dsyevd`). Column-major storage; we only ever pass
//! symmetric matrices so row/column order is immaterial.

use std::os::raw::c_char;

extern "C" {
    fn dsyevd_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );

    fn openblas_set_num_threads(n: i32);
}

/// Caps the BLAS thread pool. Experiment drivers that parallelize at the
/// trial level call this with 1 to avoid oversubscription.
pub fn set_blas_threads(n: usize) {
    unsafe { openblas_set_num_threads(n.max(1) as i32) }
}

/// Full symmetric eigendecomposition. `a` is the matrix in contiguous
/// row-major `n*n` storage and is overwritten with the eigenvectors: on
/// success, eigenvector `j` (for ascending eigenvalue `w[j]`) occupies the
/// entries `a[j*n..(j+1)*n]`.
///
/// Returns the ascending eigenvalues, or the nonzero LAPACK `info` code.
pub fn eigh_inplace(n: usize, a: &mut [f64]) -> Result<Vec<f64>, i32> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let ni = n as i32;
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let jobz = b'V' as c_char;
    let uplo = b'L' as c_char;

    // Workspace query.
    let mut wkopt = 0.0f64;
    let mut iwkopt = 0i32;
    let minus_one = -1i32;
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut wkopt,
            &minus_one,
            &mut iwkopt,
            &minus_one,
            &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    let lwork = wkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    // LAPACK wrote eigenvectors as columns of the column-major `a`, i.e. the
    // j-th eigenvector is already contiguous at a[j*n..(j+1)*n].
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_laplacian_spectrum() {
        let mut a = vec![1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0];
        let w = eigh_inplace(3, &mut a).unwrap();
        assert!((w[0] - 0.0).abs() < 1e-12);
        assert!((w[1] - 1.0).abs() < 1e-12);
        assert!((w[2] - 3.0).abs() < 1e-12);
        // eigenvector for lambda=3 is (1,-2,1)/sqrt(6) up to sign
        let v = &a[6..9];
        let scale = v[0].signum();
        let expect = [1.0, -2.0, 1.0].map(|x| x / 6.0f64.sqrt());
        for (got, want) in v.iter().zip(expect) {
            assert!((got * scale - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn zero_order_is_fine() {
        assert!(eigh_inplace(0, &mut []).unwrap().is_empty());
    }
}

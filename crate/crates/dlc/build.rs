fn main() {
    // Dense symmetric eigendecompositions go through the system LAPACK
    // (OpenBLAS ships the full LAPACK symbol set on Debian-family images).
    println!("cargo:rustc-link-lib=dylib=openblas");
}

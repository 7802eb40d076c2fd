//! Small numerical kernels: bracketed root finding, adaptive quadrature and
//! Bessel-function zeros.

pub mod bessel;
pub mod quad;
pub mod roots;

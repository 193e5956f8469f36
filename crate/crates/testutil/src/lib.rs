//! Reference implementations used to verify the pipeline from a second,
//! independent direction: extended-precision arithmetic, adaptive
//! quadrature, dense 2-D convolution, and literal transcriptions of the
//! metric definitions. Everything here favors obviousness over speed and
//! shares no code with the library under test.

pub mod bilinear;
pub mod connref;
pub mod conv;
pub mod dd;
pub mod gauss;
pub mod posterior;
pub mod quad;

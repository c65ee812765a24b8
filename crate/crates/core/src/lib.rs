//! Directional Chebyshev constants and transfinite diameter of compact sets
//! on complex algebraic curves.

pub mod curve;
pub mod error;
pub mod exactnum;
pub mod fekete;
pub mod groebner;
pub mod numeric;
pub mod chebyshev;
pub mod poly;
pub mod sampler;

pub use error::{Error, Result};
pub use exactnum::{BigRational, GaussRational};
pub use poly::{grevlex_cmp, parse_poly, HPoly, MultiIndex, Poly};
pub use groebner::{buchberger, GroebnerBasis, HilbertData, Ideal};
pub use curve::{CBasis, Curve, CurveConfig, CurveRing, DirectionalPoly, InfinityPoint, OrthoBasis, QMatrix};
pub use numeric::{CMatrix, LogDet, C64};
pub use sampler::{AffineMap, CompactSet, SampleConfig};
pub use chebyshev::{ChebResult, MinimaxConfig, MinimaxProblem};
pub use fekete::{BasisKind, DiameterReport, FeketeRun, LadderConfig};

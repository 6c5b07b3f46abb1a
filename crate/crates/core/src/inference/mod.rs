//! One-way ANOVA and Tukey HSD over cluster groupings, with the special
//! functions they rest on.

mod anova;
mod distribution;
mod quadrature;
mod special;
mod tukey;

pub use anova::{one_way_anova, AnovaResult};
pub use distribution::{
    f_cdf, f_sf, studentized_range_cdf, studentized_range_quantile, studentized_range_sf,
};
pub use quadrature::GaussLegendre;
pub use special::{ln_gamma, normal_cdf, normal_pdf, reg_inc_beta};
pub use tukey::{tukey_hsd, TukeyPair, TukeyResult};

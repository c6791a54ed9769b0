pub mod ancestry;
pub mod audit;
pub mod bd;
pub mod codec;
pub mod conformance;
pub mod consttime;
pub mod error;
pub mod final_scheme;
pub mod interm;
mod layout;
pub mod local;
pub mod plan;
pub mod prelim;
pub mod scheme;
mod segments;
pub mod tree;

/// The project book, compiled so its examples run as tests.
pub mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    pub mod overview {}
    #[doc = include_str!("../../../book/src/trees.md")]
    pub mod trees {}
    #[doc = include_str!("../../../book/src/ancestry.md")]
    pub mod ancestry {}
    #[doc = include_str!("../../../book/src/routing.md")]
    pub mod routing {}
    #[doc = include_str!("../../../book/src/codec.md")]
    pub mod codec {}
    #[doc = include_str!("../../../book/src/conformance.md")]
    pub mod conformance {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}

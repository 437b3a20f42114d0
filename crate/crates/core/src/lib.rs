pub mod error;
pub mod syntax;
pub mod types;
pub mod table;
pub mod constraints;
pub mod unify;
pub mod generics;
pub mod funtype;
pub mod emit;
pub mod pipeline;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/language.md")]
    mod language {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/generics.md")]
    mod generics {}
    #[doc = include_str!("../../../book/src/overloading.md")]
    mod overloading {}
    #[doc = include_str!("../../../book/src/function-types.md")]
    mod function_types {}
    #[doc = include_str!("../../../book/src/builtins.md")]
    mod builtins {}
}

//! Compiles every code sample of the guide in `book/` as a doc-test, so the
//! prose can never drift from the real API.

macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!($path)]
        mod $name {}
    };
}

chapter!(introduction, "../../../book/src/introduction.md");
chapter!(contention_graphs, "../../../book/src/contention-graphs.md");
chapter!(product_form, "../../../book/src/product-form.md");
chapter!(mixtures, "../../../book/src/mixtures.md");
chapter!(optimization, "../../../book/src/optimization.md");
chapter!(simulation, "../../../book/src/simulation.md");
chapter!(experiments, "../../../book/src/experiments.md");
chapter!(cli, "../../../book/src/cli.md");

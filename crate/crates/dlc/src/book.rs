//! Doc-test glue for the guide in `book/`: each chapter is attached as
//! module documentation so `cargo test --doc` compiles and runs every code
//! block in the book, keeping the prose honest.

#[cfg(doctest)]
macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $path))]
        mod $name {}
    };
}

#[cfg(doctest)]
chapter!(introduction, "introduction.md");
#[cfg(doctest)]
chapter!(graphs_and_flows, "graphs-and-flows.md");
#[cfg(doctest)]
chapter!(spectra, "spectra.md");
#[cfg(doctest)]
chapter!(directional_centrality, "directional-centrality.md");
#[cfg(doctest)]
chapter!(baselines_and_ranks, "baselines-and-ranks.md");
#[cfg(doctest)]
chapter!(thelma, "thelma.md");
#[cfg(doctest)]
chapter!(experiments, "experiments.md");
#[cfg(doctest)]
chapter!(cli, "cli.md");

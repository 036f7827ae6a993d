//! Parses a hand-written deck, reports mistakes with line numbers and
//! prints the canonical form.
//!
//! cargo run --example deck_roundtrip

use tilepic::deck::parse_deck;
use tilepic::Result;

const DECK: &str = r#"
# two-stream test
[simulation]
nx = 32
ny = 32
dx = 0.1
dy = 0.1
dt = 0.05
n_steps = 100

[tiles]
tile_nx = 8
tile_ny = 8

[species "beam"]
m_over_q = -1
ppc_x = 4
ppc_y = 4
ufl_x = 0.5

[species "background"]
m_over_q = -1
ppc_x = 4
ppc_y = 4
ufl_x = -0.5

[diagnostics]
report_every = 10
fields = energy, bz
"#;

pub fn demo() -> Result<String> {
    let deck = parse_deck(DECK)?;
    let text = deck.to_text();
    assert_eq!(parse_deck(&text)?, deck);
    print!("{text}");

    let typo = DECK.replace("tile_nx", "tilenx");
    match parse_deck(&typo) {
        Err(e) => println!("\nwith a typo:\n{e}"),
        Ok(_) => unreachable!("typo accepted"),
    }
    let fast = DECK.replace("dt = 0.05", "dt = 0.5");
    if let Err(e) = parse_deck(&fast) {
        println!("\nwith dt = 0.5:\n{e}");
    }
    Ok(text)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    demo()?;
    Ok(())
}

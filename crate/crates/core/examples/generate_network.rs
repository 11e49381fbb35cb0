//! Draws a random cross-holding network, checks its invariants and writes it
//! to JSON.
//!
//! cargo run --example generate_network -- [n] [m] [seed]

use crashnet::network::{generate_random_network, load_network, save_network, validate};

fn main() -> crashnet::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, m, seed) = (
        *args.first().unwrap_or(&10) as usize,
        *args.get(1).unwrap_or(&15) as usize,
        *args.get(2).unwrap_or(&7),
    );
    let net = generate_random_network(n, m, 10.0, 40.0, seed)?;
    println!("{n} institutions, {m} assets, {} violations", validate(&net).len());
    println!("self-ownership: {:.3?}", net.self_ownership.as_slice());
    println!("prices: {:.2?}", net.prices.as_slice());

    let path = std::env::temp_dir().join("crashnet_example_network.json");
    save_network(&net, None, &path)?;
    let (back, _) = load_network(&path)?;
    println!("wrote {} (round trip exact: {})", path.display(), back == net);
    Ok(())
}

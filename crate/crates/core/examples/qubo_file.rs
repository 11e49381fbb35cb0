//! Writes a QUBO in the text format and reads it back.

use crashnet::solver::{parse_qubo, read_qubo_file, render_qubo, write_qubo_file, Qubo};

fn main() -> crashnet::Result<()> {
    let mut q = Qubo::new(3);
    q.linear = vec![1.0, -0.5, 0.1];
    q.add(0, 1, -2.0);
    q.add(1, 2, 1.0 / 3.0);
    q.offset = 0.25;
    let text = render_qubo(&q)?;
    print!("{text}");

    let path = std::env::temp_dir().join("crashnet_example.qubo");
    write_qubo_file(&q, &path)?;
    println!("round trip exact: {}", read_qubo_file(&path)? == q);

    match parse_qubo("p qubo 0 2 2 1\n0 0 1\n1 1 1\n0 1 -2\n1 0 3\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}

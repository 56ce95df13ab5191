// Driving the command-line front end in process: generate a problem, then
// compute a norm of a small file.
//
// `cargo run --example command_line`

use boxnorm::cli::{run, EXIT_OK};

fn call(args: &[&str]) -> Result<String, Box<dyn std::error::Error>> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        std::iter::once("boxnorm").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    if code != EXIT_OK {
        return Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)).into());
    }
    Ok(String::from_utf8(out)?)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let generated = call(&["gen", "lowrank", "d=6", "r=2", "seed=1"])?;
    println!(
        "{}",
        generated.lines().take(4).collect::<Vec<_>>().join("\n")
    );

    let dir = std::env::temp_dir().join(format!("boxnorm-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let file = dir.join("w.txt");
    std::fs::write(&file, "2 1 0.5\n")?;
    let printed = call(&["norm", "--ksup", "k=2", file.to_str().unwrap()])?;
    print!("{printed}");
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

//! Macros, loops, labels and classical control flow in QtASM.

use qtvm::asm::{compile, emit, preprocess};
use qtvm::vm::{run_shots, RunOptions};

const SOURCE: &str = "\
# repeat-until-success: flip a coin until it lands on 1, counting attempts
qubits 3
%define N 3
%for i = 0 to N - 1
ry($(i), $(pi / (i + 2)))
%endfor
cset(2, 1)
again:
h(0)
meas(0, 0)
cadd(1, 1, 2)
cjmp(0, done)
jmp(again)
done:
cif(0, 'x(1)')
meas(1, 3)
halt
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{}", preprocess(SOURCE)?);
    let program = compile(SOURCE)?;
    print!("{}", emit(&program));
    let hist = run_shots(&program, 200, 3, &RunOptions::default())?;
    println!("\n{}", hist.to_csv());

    let err = compile("qubits 2\ncnot(0, 0)").unwrap_err();
    println!("diagnostic: {err}");
    Ok(())
}

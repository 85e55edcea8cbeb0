use crate::isa::{Gate, Instruction, Program};

/// Teleports `u(θ, φ, λ)|0⟩` from qubit 0 to qubit 2. Registers 1 and 2 hold
/// the two measured bits.
pub fn build_teleportation(theta: f64, phi: f64, lambda: f64) -> Program {
    let g = Instruction::Gate;
    let instrs = vec![
        g(Gate::U {
            target: 0,
            theta,
            phi,
            lambda,
        }),
        g(Gate::H(1)),
        g(Gate::Cnot { control: 1, target: 2 }),
        g(Gate::Cnot { control: 0, target: 1 }),
        g(Gate::H(0)),
        Instruction::Meas { qubit: 0, creg: 1 },
        Instruction::Meas { qubit: 1, creg: 2 },
        Instruction::Cif {
            creg: 2,
            body: Box::new(g(Gate::X(2))),
        },
        Instruction::Cif {
            creg: 1,
            body: Box::new(g(Gate::Z(2))),
        },
    ];
    Program::new(3, instrs).expect("teleportation program is well formed")
}

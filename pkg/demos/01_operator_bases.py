# Operator bases used throughout: Pauli for Alice's qubit, rescaled Gell-Mann for
# Bob's qubit+vacuum qutrit, and their 36-element product.
import numpy as np

from lossyqkd.operators import (
    assemble, expand, gellmann_basis, partial_transpose, pauli_basis, product_basis,
)

pauli = pauli_basis()
gm = gellmann_basis()
pb = product_basis(pauli, gm)
print(len(pb), "product elements of dimension", pb.dim)

# every basis obeys Tr(e_i e_j) = d delta_ij
gram = np.einsum("aij,bji->ab", pb.elements, pb.elements).real
print("Gram matrix is 6 * identity:", np.allclose(gram, 6 * np.eye(36)))

# coefficients x_kl = Tr(S_kl rho) and back again with the 1/6 prefactor
psi = np.zeros(6)
psi[0] = psi[4] = 1 / np.sqrt(2)         # (|0,0> + |1,1>)/sqrt(2), vacuum empty
rho = np.outer(psi, psi)
x = expand(rho, pb)
for label, value in zip(pb.labels, x):
    if abs(value) > 1e-12:
        print(f"  x[{label}] = {value:+.4f}")
print("round trip exact:", np.allclose(assemble(x, pb), rho))

# the partial transpose on Bob exposes the entanglement
print("min eigenvalue of rho^Gamma:", np.linalg.eigvalsh(partial_transpose(rho))[0])

#!/usr/bin/env python3
"""Regenerate the FCIDUMP fixtures under tests/data.

Integrals are expressed in the Loewdin-orthogonalized STO-3G atomic basis so
that each orthonormal orbital stays attached to one hydrogen atom. Reference
RHF and FCI energies from PySCF are written to tests/data/reference.json.

Usage: python3 generate_fixtures.py [output_dir]
"""
import json
import os
import sys

import numpy as np
from pyscf import ao2mo, fci, gto, scf
from pyscf.tools import fcidump

BOND = 0.7414  # H-H distance inside each pair, angstrom
H4_GAPS = [1.0, 1.5, 2.0, 3.0, 8.0, 30.0]  # pair-pair separation, angstrom


def lowdin_integrals(mol):
    s = mol.intor("int1e_ovlp")
    w, v = np.linalg.eigh(s)
    x = v @ np.diag(w ** -0.5) @ v.T
    h1 = x.T @ mol.intor("int1e_kin") @ x + x.T @ mol.intor("int1e_nuc") @ x
    eri = ao2mo.restore(1, ao2mo.kernel(mol, x, compact=False), mol.nao)
    return h1, eri


def write(path, mol):
    h1, eri = lowdin_integrals(mol)
    ecore = mol.energy_nuc()
    fcidump.from_integrals(path, h1, ao2mo.restore(8, eri, mol.nao), mol.nao,
                           mol.nelectron, nuc=ecore, ms=0, tol=1e-14,
                           float_format=" %.16e")
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    e_rhf = mf.kernel()
    e_fci, _ = fci.direct_spin1.kernel(h1, eri, mol.nao, mol.nelectron, ecore=ecore,
                                       conv_tol=1e-13)
    return {"rhf": float(e_rhf), "fci": float(e_fci)}


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "..", "tests", "data")
    os.makedirs(out, exist_ok=True)
    ref = {}
    h2 = gto.M(atom=f"H 0 0 0; H 0 0 {BOND}", basis="sto-3g", unit="Angstrom")
    ref["h2_0.7414"] = write(os.path.join(out, "h2_0.7414.fcidump"), h2)
    for gap in H4_GAPS:
        z = [0.0, BOND, BOND + gap, 2 * BOND + gap]
        mol = gto.M(atom="; ".join(f"H 0 0 {c}" for c in z), basis="sto-3g",
                    unit="Angstrom")
        name = f"h4_gap{gap:.1f}"
        ref[name] = write(os.path.join(out, name + ".fcidump"), mol)
    with open(os.path.join(out, "reference.json"), "w") as f:
        json.dump(ref, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()

"""Jacobi sn, the equianharmonic pair and the punctured-plane product."""
import numpy as np

from qmk.special import (agm_K, jacobi_sn, punctured_product_report, sn_product,
                         weierstrass_pair)

if __name__ == "__main__":
    k = 0.5
    K, Kp = agm_K(k)
    print(f"k={k}: K={K:.15f} K'={Kp:.15f}")
    u = np.array([0.3, 1.0 + 0.5j, K, K + 0.5j * Kp])
    print("sn via Landen :", np.round(jacobi_sn(u, k), 12))
    print("sn via product:", np.round(sn_product(u, k), 12))
    H, G = weierstrass_pair(np.array([0.4 + 0.2j, 1.1 - 0.3j]))
    print("H^3 + G^3 =", np.round(H ** 3 + G ** 3, 12))
    rep = punctured_product_report(k, 1, 40)
    print(f"product vs sn: {rep['consistency_max']:.1e}")
    lit, sh = rep["kappa_literal_q"], rep["kappa_shifted_q"]
    print(f"fitted kappa, multiplier q      : spread {lit['spread']:.2e} (no constant fits)")
    print(f"fitted kappa, multiplier q^(K+iK'): {complex(sh['kappa']).real:.12f} "
          f"spread {sh['spread']:.1e}, 1/k^2 = {sh['kappa_expected']}")

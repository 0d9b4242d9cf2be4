"""Dormand-Prince 5(4) coefficients shared by both stepping kernels.

Includes the 4th-order dense-output interpolant matrix (Shampine form).
Keeping a single source guarantees the compiled and pure-Python kernels
agree bit for bit.
"""

C2, C3, C4, C5, C6 = 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0

A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
# 5th-order solution weights (also the last stage row; FSAL)
B1, B2, B3, B4, B5, B6 = 35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84

# embedded error weights: 5th-order minus 4th-order
E1 = 71 / 57600
E2 = 0.0
E3 = -71 / 16695
E4 = 71 / 1920
E5 = -17253 / 339200
E6 = 22 / 525
E7 = -1 / 40

# dense-output matrix: y(t0 + u*h) = y0 + h*u*(Q0 + u*(Q1 + u*(Q2 + u*Q3)))
# with Q[m] = sum_s k_s * P[s][m]
P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

# step-control constants (PI controller)
SAFETY = 0.9
BETA = 0.04
EXPO1 = 0.2 - BETA * 0.75
FAC_MIN = 0.2  # strongest shrink per step
FAC_MAX = 10.0  # strongest growth per step

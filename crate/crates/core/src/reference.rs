//! Hand transcriptions of the reference hydrogen systems at truncation
//! orders 2 and 3, term for term, in the text expression language.
//!
//! Identifiers: `l` is `p_theta`, `dl2` is `G[0,0,0,2]`, `i` the imaginary
//! unit. Entries are `(variable, rhs)`; a rhs of `None` marks an equation
//! that is not listed. Known typos are kept verbatim.

pub(crate) const ORDER2: &[(&str, Option<&str>)] = &[
    ("r", Some("p_r/m")),
    (
        "p_r",
        Some(
            "l^2/(m*r^3) - k/r^2 + G[0,0,0,2]/(m*r^3) + 3/r^4*G[2,0,0,0]*(l^2/m*2/r - k) \
             - 6*l/(m*r^4)*G[1,0,0,1]",
        ),
    ),
    (
        "theta",
        Some("l/(m*r^2) - 2/(m*r^3)*G[1,0,0,1] + 3*l/(m*r^4)*G[2,0,0,0]"),
    ),
    ("p_theta", Some("0")),
    ("G_2_0_0_0", Some("-2/m*G[1,1,0,0]")),
    (
        "G_1_1_0_0",
        Some(
            "-1/m*G[0,2,0,0] + (3*l^2/(2*m*r) - k)*2/r^3*G[2,0,0,0] - 2*l/(m*r^3)*G[1,0,0,1]",
        ),
    ),
    ("G_1_0_1_0", Some("-1/m*G[0,1,1,0] - 1/(m*r^2)*G[1,0,0,1] + 2*l/(m*r^3)*G[2,0,0,0]")),
    ("G_1_0_0_1", Some("-1/m*G[0,1,0,1]")),
    (
        "G_0_2_0_0",
        Some("4*(3*l^2/(2*m*r) - k)/r^3*G[1,1,0,0] - 4*l/(m*r^3)*G[0,1,0,1]"),
    ),
    (
        "G_0_1_1_0",
        Some(
            "-1/(m*r^2)*G[0,1,0,1] + (3*l^2/(2*m*r) - k)*2/r^3*G[1,0,1,0] \
             + 2*l/(m*r^3)*(G[1,1,0,0] - G[0,0,1,1])",
        ),
    ),
    (
        "G_0_1_0_1",
        Some("(3*l^2/(2*m*r) - k)*2/r^3*G[1,0,0,1] - 2*l/(m*r^3)*G[0,0,0,2]"),
    ),
    ("G_0_0_2_0", Some("-2/(m*r^2)*G[0,0,1,1] + 4*l/(m*r^3)*G[1,0,1,0]")),
    ("G_0_0_1_1", Some("-1/(m*r^2)*G[0,0,0,2] + 2*l/(m*r^3)*G[1,0,0,1]")),
    ("G_0_0_0_2", Some("0")),
];

pub(crate) const ORDER3: &[(&str, Option<&str>)] = &[
    ("r", Some("p_r/m")),
    (
        "p_r",
        Some(
            "l^2/(m*r^3) - k/r^2 + dl2/(m*r^3) + 3/r^4*G[2,0,0,0]*(l^2/m*2/r - k) \
             - 4/r^5*G[3,0,0,0]*(l^2/m*5/r - k) \
             - 6/(m*r^4)*(l*G[1,0,0,1] + 1/2*G[1,0,0,2]) + 12*l/(m*r^5)*G[2,0,0,1]",
        ),
    ),
    (
        "theta",
        Some(
            "l/(m*r^2) - 2/(m*r^3)*G[1,0,0,1] + 3/(m*r^4)*(l*G[2,0,0,0] + G[2,0,0,1]) \
             - 4*l/(m*r^5)*G[3,0,0,0]",
        ),
    ),
    ("p_theta", Some("0")),
    ("G_2_0_0_0", Some("-2/m*G[1,1,0,0]")),
    (
        "G_1_1_0_0",
        Some(
            "-1/m*G[0,2,0,0] + (3*l^2/(2*m*r) - k)*2/r^3*G[2,0,0,0] \
             - (2*l^2/(m*r) - k)*3/r^4*G[3,0,0,0] \
             - 2/(m*r^3)*(l*G[1,0,0,1] + 1/2*G[1,0,0,2]) + 6*l*G[2,0,0,1]/(m*r^4)",
        ),
    ),
    (
        "G_1_0_1_0",
        Some(
            "-1/m*G[0,1,1,0] - 1/(m*r^2)*G[1,0,0,1] + 2/(m*r^3)*(l*G[2,0,0,0] + G[2,0,0,1]) \
             - 3*l/(m*r^4)*G[3,0,0,0]",
        ),
    ),
    ("G_1_0_0_1", Some("-1/m*G[0,1,0,1]")),
    (
        "G_0_2_0_0",
        Some(
            "4*(3*l^2/(2*m*r) - k)/r^3*G[1,1,0,0] - 6*(2*l^2/(m*r) - k)/r^4*G[2,1,0,0] \
             - 2/(m*r^3)*(2*l*G[0,1,0,1] + G[0,1,0,2]) + 12*l/(m*r^4)*G[1,1,0,1]",
        ),
    ),
    (
        "G_0_1_1_0",
        Some(
            "-1/(m*r^2)*G[0,1,0,1] + (3*l^2/(2*m*r) - k)*2/r^3*G[1,0,1,0] \
             + 1/(m*r^3)*(2*l*(G[1,1,0,0] - G[0,0,1,1])) \
             - (G[0,0,1,2] - 2*G[1,1,0,1]) - (2*l^2/(m*r) - k)*3/r^3*G[2,0,1,0] \
             + 3*l/(m*r^4)*(2*G[1,0,1,1] - G[2,1,0,0])",
        ),
    ),
    (
        "G_0_1_0_1",
        Some(
            "(3*l^2/(2*m*r) - k)*2/r^3*G[1,0,0,1] - (2*l^2/(m*r) - k)*2/r^4*G[2,0,0,1] \
             - 1/(m*r^3)*(2*l*dl2 - G[0,0,0,3]) + 6*l/(m*r^4)*G[1,0,0,2]",
        ),
    ),
    (
        "G_0_0_2_0",
        Some(
            "-2/(m*r^2)*G[0,0,1,1] + 4/(m*r^3)*(l*G[1,0,1,0] + G[1,0,1,1]) \
             - 6*l/(m*r^4)*G[2,0,1,0]",
        ),
    ),
    (
        "G_0_0_1_1",
        Some(
            "-dl2/(m*r^2) + 2/(m*r^3)*(l*G[1,0,0,1] + G[1,0,0,2]) - 3*l/(m*r^4)*G[2,0,0,1]",
        ),
    ),
    ("G_0_0_0_2", Some("0")),
    ("G_3_0_0_0", Some("-3*G[2,1,0,0]/m")),
    (
        "G_2_1_0_0",
        Some(
            "-2*G[1,2,0,0]/m + 3/r^4*(-k + 2*l^2/(m*r))*G[2,0,0,0]^2 \
             + 2/r^3*(-k + 3*l^2/(2*m*r))*G[3,0,0,0] \
             + (dl2*G[2,0,0,0] - 2*l*G[2,0,0,1])/(m*r^3) \
             - 3*(2*l*G[1,0,0,1]*G[2,0,0,0] + G[1,0,0,2]*G[2,0,0,0])/(m*r^4)",
        ),
    ),
    (
        "G_2_0_1_0",
        Some(
            "-2*G[1,1,1,0]/m - G[2,0,0,1]/(m*r^2) \
             + 3*(l*G[2,0,0,0]^2 + G[2,0,0,0]*G[2,0,0,1])/(m*r^4) \
             - 2*(G[1,0,0,1]*G[2,0,0,0] - l*G[3,0,0,0])/(m*r^3)",
        ),
    ),
    ("G_2_0_0_1", Some("-2*G[1,1,0,1]/m")),
    (
        "G_1_2_0_0",
        Some(
            "-G[0,3,0,0]/m - 3*(4*l*G[1,0,0,1]*G[1,1,0,0] + 2*G[1,0,0,2]*G[1,1,0,0])/(m*r^4) \
             + 2*(dl2*G[1,1,0,0] - 2*l*G[1,1,0,1])/(m*r^3) \
             + 6/r^4*(-k + 2*l^2/(m*r))*G[1,1,0,0]*G[2,0,0,0] \
             + 4/r^3*(-k + 3*l^2/(2*m*r))*G[2,1,0,0]",
        ),
    ),
    (
        "G_1_1_1_0",
        Some(
            "-G[0,2,1,0]/m - G[1,1,0,1]/(m*r^2) \
             + 3/r^4*(-k + 2*l^2/(m*r))*G[1,0,1,0]*G[2,0,0,0] \
             + 2/r^3*(-k + 3*l^2/(2*m*r))*G[2,0,1,0] \
             + 3/(m*r^4)*(l*(-2*G[1,0,0,1]*G[1,0,1,0] + G[1,1,0,0]*G[2,0,0,0]) \
             - (G[1,0,0,2]*G[1,0,1,0] - G[1,1,0,0]*G[2,0,0,1])) \
             - 1/(m*r^3)*2*(1/2*(-dl2*G[1,0,1,0] + 2*G[1,0,0,1]*G[1,1,0,0]) \
             + l*(G[1,0,1,1] - G[2,1,0,0]))",
        ),
    ),
    (
        "G_1_1_0_1",
        Some(
            "-G[0,2,0,1]/m + (dl2*G[1,0,0,1] - 2*l*G[1,0,0,2])/(m*r^3) \
             - 3*(2*l*G[1,0,0,1]^2 + G[1,0,0,1]*G[1,0,0,2])/(m*r^4) \
             + 3/r^4*(-k + 2*l^2/(m*r))*G[1,0,0,1]*G[2,0,0,0] \
             + 2/r^3*(-k + 3*l^2/(2*m*r))*G[2,0,0,1]",
        ),
    ),
    (
        "G_1_0_2_0",
        Some(
            "-G[0,1,2,0]/m + 6*G[1,0,1,0]*(l*G[2,0,0,0] + G[2,0,0,1])/(m*r^4) \
             - 4*(G[1,0,0,1]*G[1,0,1,0] - l*G[2,0,1,0])/(m*r^3)",
        ),
    ),
    (
        "G_1_0_1_1",
        Some(
            "-G[0,1,1,1]/m - G[1,0,0,2]/(m*r^2) \
             + 3*(l*G[1,0,0,1]*G[2,0,0,0] + G[1,0,0,1]*G[2,0,0,1])/(m*r^4) \
             - 2*(G[1,0,0,1]^2 - l*G[2,0,0,1])/(m*r^3)",
        ),
    ),
    ("G_1_0_0_2", Some("-G[0,1,0,2]/m")),
    (
        "G_0_3_0_0",
        Some(
            "(3*dl2*G[0,2,0,0] - 6*l*G[0,2,0,1])/(m*r^3) \
             + 6/r^3*(-k + 3*l^2/(2*m*r))*G[1,2,0,0] \
             - 9*(2*l*G[0,2,0,0]*G[1,0,0,1] + G[0,2,0,0]*G[1,0,0,2])/(m*r^4) \
             + 9/r^4*(k - 2*l^2/(m*r))*(i*hbar*G[1,1,0,0] - G[0,2,0,0]*G[2,0,0,0])",
        ),
    ),
    (
        "G_0_2_1_0",
        Some(
            "-G[0,2,0,1]/(m*r^2) \
             - 4/r^3*(k - 3*l^2/(2*m*r))*(G[1,1,1,0] - G[0,1,1,0]*G[1,0,0,0]) \
             - 6/r^4*(k - 2*l^2/(m*r))*G[0,1,1,0]*G[2,0,0,0] \
             - 2/(m*r^3)*((G[0,2,0,0]*G[1,0,0,1] - dl2*G[0,1,1,0]) \
             + l*(2*G[0,1,1,1] - G[1,2,0,0])) \
             + 3/(m*r^4)*(l*(G[0,2,0,0]*G[2,0,0,0] - 4*G[0,1,1,0]*G[1,0,0,1] \
             + i*hbar*(G[0,0,1,1] - 2*G[1,1,0,0])) \
             + (G[0,2,0,0]*G[2,0,0,1] - 2*G[0,1,1,0]*G[1,0,0,2] \
             + i*hbar/2*(G[0,0,1,2] - 4*G[1,1,0,1])))",
        ),
    ),
    (
        "G_0_2_0_1",
        Some(
            "2*(dl2*G[0,1,0,1] - 2*l*G[0,1,0,2])/(m*r^3) \
             - 6*(2*l*G[0,1,0,1]*G[1,0,0,1] + G[0,1,0,1]*G[1,0,0,2])/(m*r^4) \
             + 4/r^3*(-k + 3*l^2/(2*m*r))*G[1,1,0,1] \
             + 6/r^4*(-k + 2*l^2/(m*r))*G[0,1,0,1]*G[2,0,0,0]",
        ),
    ),
    (
        "G_0_1_2_0",
        Some(
            "-2*G[0,1,1,1]/(m*r^2) + 2/r^3*(-k + 3*l^2/(2*m*r))*G[1,0,2,0] \
             + 3/r^4*(-k + 2*l^2/(m*r))*G[0,0,2,0]*G[2,0,0,0] \
             - 2/(m*r^3)*((2*G[0,1,1,0]*G[1,0,0,1] - dl2*G[0,0,2,0] \
             + i*hbar/2*(G[1,1,0,0] - 2*G[0,0,1,1])) + l*(G[0,0,2,1] - 2*G[1,1,1,0])) \
             + 3/(m*r^4)*((2*G[0,1,1,0]*G[2,0,0,1] - G[0,0,2,0]*G[1,0,0,2] \
             + i*hbar/2*(G[2,1,0,0] - 4*G[1,0,1,1])) \
             + 2*l*(G[0,1,1,0]*G[2,0,0,0] - G[0,0,2,0]*G[1,0,0,1]))",
        ),
    ),
    (
        "G_0_1_1_1",
        Some(
            "-G[0,1,0,2]/(m*r^2) + 2/r^3*(-k + 3*l^2/(2*m*r))*G[1,0,1,1] \
             + 3/r^4*(-k + 2*l^2/(m*r))*G[0,0,1,1]*G[2,0,0,0] \
             + 3/(m*r^4)*(l*(-2*G[0,0,1,1]*G[1,0,0,1] + G[0,1,0,1]*G[2,0,0,0]) \
             - (G[0,0,1,1]*G[1,0,0,2] - G[0,1,0,1]*G[2,0,0,1])) \
             - 1/(m*r^3)*((-dl2*G[0,0,1,1] + 2*G[0,1,0,1]*G[1,0,0,1]) \
             + 2*l*(G[0,0,1,2] - G[1,1,0,1]))",
        ),
    ),
    (
        "G_0_1_0_2",
        Some(
            "(dl2^2 - 2*l*G[0,0,0,3])/(m*r^3) + 2/r^3*(-k + 3*l^2/(2*m*r))*G[1,0,0,2] \
             + 3/r^4*(-k + 2*l^2/(m*r))*dl2*G[2,0,0,0] \
             - 3*dl2*(2*l*G[1,0,0,1] + G[1,0,0,2])/(m*r^4)",
        ),
    ),
    (
        "G_0_0_3_0",
        Some(
            "-3*G[0,0,2,1]/(m*r^2) - 6*(G[0,0,2,0]*G[1,0,0,1] - l*G[1,0,2,0])/(m*r^3) \
             + 9*(l*G[0,0,2,0]*G[2,0,0,0] + G[0,0,2,0]*G[2,0,0,1])/(m*r^4)",
        ),
    ),
    ("G_0_0_2_1", None),
    ("G_0_0_1_2", None),
    ("G_0_0_0_3", Some("0")),
];

/// Variables whose order-3 equation is taken over unchanged from order 2.
pub(crate) const ORDER3_CARRIED: &[&str] = &["r", "p_theta", "G_2_0_0_0", "G_1_0_0_1"];

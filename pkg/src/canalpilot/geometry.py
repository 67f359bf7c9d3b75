"""Small 3D math kernel: vectors, unit quaternions, orthonormal frames.

Conventions used everywhere in this package:

* vectors are float64 numpy arrays of shape (3,), in meters when they are
  positions and unitless when they are directions;
* quaternions are float64 numpy arrays of shape (4,) in (w, x, y, z) order,
  kept unit-norm and canonicalized to w >= 0 so serialized data is stable;
* frames ("bases") are 3x3 matrices whose *columns* are the frame axes,
  orthonormal and right-handed;
* global "up" is the constant +z.
"""

import numpy as np

Z_UP = np.array([0.0, 0.0, 1.0])

_EPS_ZERO = 1e-9


def vec3(x, y, z) -> np.ndarray:
    return np.array([float(x), float(y), float(z)])


def normalize(v: np.ndarray) -> np.ndarray:
    """Unit vector along v. Raises on (near) zero input."""
    n = float(np.linalg.norm(v))
    if n < _EPS_ZERO:
        raise ValueError("cannot normalize a zero-length vector")
    return v / n


def project_ground(v: np.ndarray) -> np.ndarray:
    """Drop the z component. Not normalized; the zero vector maps to zero."""
    return np.array([v[0], v[1], 0.0])


def project_to_plane(v: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Component of v orthogonal to a unit normal (in-plane projection)."""
    return v - np.dot(v, normal) * normal


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    """Angle in [0, pi] between two nonzero vectors.

    The normalized dot product is clamped so rounding noise near +/-1
    cannot produce NaN.
    """
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu < _EPS_ZERO or nv < _EPS_ZERO:
        raise ValueError("angle_between requires nonzero vectors")
    d = float(np.dot(u, v)) / (nu * nv)
    return float(np.arccos(np.clip(d, -1.0, 1.0)))


def rotate_toward(v: np.ndarray, target: np.ndarray, angle: float) -> np.ndarray:
    """Rotate unit vector v by `angle` radians toward unit vector `target`.

    The rotation happens in the plane spanned by the two vectors.  If they
    are (anti)parallel the rotation plane is undefined and v is returned
    unchanged for the parallel case; the antiparallel case picks an
    arbitrary fixed orthogonal axis so the result is still deterministic.
    """
    total = angle_between(v, target)
    if total < _EPS_ZERO:
        return v.copy()
    axis = np.cross(v, target)
    axis_norm = float(np.linalg.norm(axis))
    if axis_norm < _EPS_ZERO:
        # Antiparallel: rotate about any axis orthogonal to v.
        axis = np.cross(v, Z_UP if abs(v[2]) < 0.9 else np.array([1.0, 0.0, 0.0]))
        axis_norm = float(np.linalg.norm(axis))
    axis = axis / axis_norm
    return rotate_about_axis(v, axis, min(angle, total))


def rotate_about_axis(v: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation of v about a unit axis."""
    c, s = np.cos(angle), np.sin(angle)
    return v * c + np.cross(axis, v) * s + axis * np.dot(axis, v) * (1.0 - c)


# ---------------------------------------------------------------------------
# quaternions (w, x, y, z)
# ---------------------------------------------------------------------------

QUAT_IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Unit quaternion with the w >= 0 sign convention."""
    n = float(np.linalg.norm(q))
    if n < _EPS_ZERO:
        raise ValueError("cannot normalize a zero quaternion")
    q = q / n
    if q[0] < 0.0:
        q = -q
    return q


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = normalize(np.asarray(axis, dtype=float))
    half = 0.5 * angle
    s = np.sin(half)
    return quat_normalize(np.array([np.cos(half), axis[0] * s, axis[1] * s, axis[2] * s]))


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    qv = np.array([0.0, v[0], v[1], v[2]])
    return quat_mul(quat_mul(q, qv), quat_conj(q))[1:]


def quat_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Rotation angle between two unit quaternions (shorter arc)."""
    d = abs(float(np.dot(a, b)))
    return 2.0 * float(np.arccos(np.clip(d, -1.0, 1.0)))


def slerp_unit(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """Spherical linear interpolation along the shorter arc.

    Antipodal 4-vectors (dot within 1e-6 of -1) encode the same rotation;
    the shorter-arc sign flip turns them into the nearly-identical case,
    which degrades to nlerp.  That is the deterministic fallback: no great
    circle is singled out, the path just stays at the shared rotation.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("slerp parameter must be in [0, 1]")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dot = float(np.dot(a, b))
    if dot < 0.0:          # take the shorter arc
        b = -b
        dot = -dot

    if dot > 1.0 - 1e-6:
        # Nearly identical: nlerp is exact enough and avoids 0/0.
        return quat_normalize(a + t * (b - a))

    omega = np.arccos(dot)
    so = np.sin(omega)
    out = (np.sin((1.0 - t) * omega) / so) * a + (np.sin(t * omega) / so) * b
    return quat_normalize(out)


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    """Unit quaternion for a rotation matrix (Shepperd's method)."""
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([
            0.25 * s,
            (m[2, 1] - m[1, 2]) / s,
            (m[0, 2] - m[2, 0]) / s,
            (m[1, 0] - m[0, 1]) / s,
        ])
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array([
            (m[2, 1] - m[1, 2]) / s,
            0.25 * s,
            (m[0, 1] + m[1, 0]) / s,
            (m[0, 2] + m[2, 0]) / s,
        ])
    elif m[1, 1] > m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array([
            (m[0, 2] - m[2, 0]) / s,
            (m[0, 1] + m[1, 0]) / s,
            0.25 * s,
            (m[1, 2] + m[2, 1]) / s,
        ])
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array([
            (m[1, 0] - m[0, 1]) / s,
            (m[0, 2] + m[2, 0]) / s,
            (m[1, 2] + m[2, 1]) / s,
            0.25 * s,
        ])
    return quat_normalize(q)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


# ---------------------------------------------------------------------------
# orthonormal frames
# ---------------------------------------------------------------------------

def basis_from_columns(c1: np.ndarray, c2: np.ndarray, c3: np.ndarray) -> np.ndarray:
    """3x3 frame with the given columns; validates orthonormality and handedness."""
    m = np.column_stack([c1, c2, c3])
    if not np.allclose(m.T @ m, np.eye(3), atol=1e-6):
        raise ValueError("basis columns are not orthonormal")
    if float(np.dot(np.cross(c1, c2), c3)) <= 0.0:
        raise ValueError("basis is not right-handed")
    return m

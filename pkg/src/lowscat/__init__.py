"""Low-frequency scattering by planar obstacles.

Modules
-------
specfun      integer-order Bessel/Hankel functions, digamma, the free resolvent kernel
logseries    series in lambda^j (log lambda - a)^k and the shifted-log inversion
potential    geometry, panels, equilibrium measure, capacity and the function G
diskref      exact disk scattering matrix, spectral shift and DtN eigenvalue
asymptotics  closed-form leading-order formulas in terms of the log-capacity
cli          the ``lowscat`` command
"""

__version__ = "0.1.0"

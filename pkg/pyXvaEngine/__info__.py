__title__ = "pyXvaEngine"
__description__ = "Bilateral collateral and funding adjusted derivative pricing by least-squares Monte Carlo"
__version__ = "0.1.0"
__license__ = "MIT"
__url__ = "https://github.com/CharmingYang0/pyXvaEngine"
__author__ = "Cooper Yang"
__author_email__ = "cm_yang@yeah.net"

from .algebra import AlgebraElement, MultiMatrixAlgebra
from .k0_order import DyadicClass, LexClass, RationalClass, SimplicialClass
from .svf_engine import svf, svf_table

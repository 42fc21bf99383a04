"""
dbaops: commuting difference operators from discrete Baker-Akhiezer modules
"""
__version__ = '0.1.0'

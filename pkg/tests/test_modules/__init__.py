import sys
sys.path.append('./test_modules/')
int main(void) { float f = 1.5f; double d = 2.5; return f < d; }

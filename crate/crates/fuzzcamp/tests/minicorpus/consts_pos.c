int main(void) { const int limit = 7; return limit; }

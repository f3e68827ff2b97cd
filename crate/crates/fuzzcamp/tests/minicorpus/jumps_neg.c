static int gotos_seen;
int main(void) { char *s = "goto"; gotos_seen = s != 0; return gotos_seen; }
